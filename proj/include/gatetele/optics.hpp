#pragma once

// Linear-optics model of the teleportation setup.
//
// Register layout matches the protocol: qubit 1 = polarization of photon A,
// 2 = path of photon A, 3 = path of photon B, 4 = polarization of photon B.
//
// Jones conventions: a wave plate with fast axis at angle t from H and
// retardance d is R(t) diag(1, e^{id}) R(-t), with R the active rotation
// [[cos, -sin], [sin, cos]]. A half-wave plate is therefore
// [[cos 2t, sin 2t], [sin 2t, -cos 2t]] (t = 45 deg swaps H and V) and a
// quarter-wave plate at 0 is diag(1, i). Reflection phases at beam splitters
// are dropped: a PBS acts on (polarization, path) as a CNOT with the
// polarization as control, and the 50/50 BS is a Hadamard on the path.
//
// Light meets the quarter-wave plate first when preparing a polarization, so
// prep_to_state returns HWP(h) QWP(q) |H>.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gatetele/core.hpp"
#include "gatetele/protocol.hpp"

namespace gatetele::optics {

// ---------------------------------------------------------------------------
// Elements

struct Element {
  enum class Kind { hwp, qwp, pbs, bs_5050 };
  Kind kind = Kind::hwp;
  double angle = 0.0;  // radians, wave plates only

  static Element hwp(double a) { return {Kind::hwp, a}; }
  static Element qwp(double a) { return {Kind::qwp, a}; }
  static Element pbs() { return {Kind::pbs, 0.0}; }
  static Element bs_5050() { return {Kind::bs_5050, 0.0}; }
};

namespace detail {
inline CMatrix rotation(double t) {
  CMatrix r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

inline CMatrix wave_plate(double angle, double retardance) {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = std::polar(1.0, retardance);
  return rotation(angle) * d * rotation(-angle);
}
}  // namespace detail

/// Unitary of an optical element. Wave plates and the BS act on one qubit;
/// the PBS acts on (polarization, path).
inline Operator element_operator(const Element& e) {
  if (!std::isfinite(e.angle)) throw InvalidArgument("element angle must be finite");
  switch (e.kind) {
    case Element::Kind::hwp: return Operator(detail::wave_plate(e.angle, std::numbers::pi));
    case Element::Kind::qwp: return Operator(detail::wave_plate(e.angle, std::numbers::pi / 2));
    case Element::Kind::pbs: return gates::cnot();
    case Element::Kind::bs_5050: return gates::hadamard();
  }
  throw InvalidArgument("unknown element kind");
}

/// |0><0| (x) u0 + |1><1| (x) u1 on (path, polarization): an element placed
/// in each arm of an interferometer.
inline Operator in_arms(const Operator& u0, const Operator& u1) {
  if (u0.dim() != 2 || u1.dim() != 2) throw DimensionError("in_arms expects single-qubit elements");
  CMatrix m = CMatrix::Zero(4, 4);
  m.topLeftCorner(2, 2) = u0.elements();
  m.bottomRightCorner(2, 2) = u1.elements();
  return Operator(m);
}

// ---------------------------------------------------------------------------
// Settings

inline double reduce_angle(double a) {
  double r = std::fmod(a, std::numbers::pi);
  if (r < 0) r += std::numbers::pi;
  return r;
}

/// Wave-plate pair preparing one polarization from |H>. Angles in radians,
/// reduced mod pi.
struct PrepSetting {
  double hwp_angle = 0.0;
  double qwp_angle = 0.0;

  PrepSetting() = default;
  PrepSetting(double hwp, double qwp) : hwp_angle(reduce_angle(hwp)), qwp_angle(reduce_angle(qwp)) {}

  [[nodiscard]] Operator unitary() const {
    return element_operator(Element::hwp(hwp_angle)) * element_operator(Element::qwp(qwp_angle));
  }
};

inline PureState prep_to_state(const PrepSetting& p) {
  return apply(p.unitary(), polarization_state('H'), {1});
}

/// Plate angles for the six standard polarizations.
inline PrepSetting prep_for(char label) {
  constexpr double pi = std::numbers::pi;
  switch (label) {
    case 'H': return {0.0, 0.0};
    case 'V': return {pi / 4, 0.0};
    case 'D': return {pi / 8, 0.0};
    case 'A': return {-pi / 8, 0.0};
    case 'R': return {0.0, pi / 4};
    case 'L': return {0.0, -pi / 4};
    default: throw InvalidArgument(std::string("no preparation for label '") + label + "'");
  }
}

/// A1..A4: A1/A2 sit in paths 0/1 of photon A, A3/A4 in paths 0/1 of photon B.
using PrepSettings = std::array<PrepSetting, 4>;

/// Product input |a>_1 |b>_4 with both arms of each photon set alike.
inline PrepSettings prep_for_input(char q1, char q4) {
  const PrepSetting a = prep_for(q1);
  const PrepSetting b = prep_for(q4);
  return {a, a, b, b};
}

/// Analyzer labels for qubits 1 and 4, each from {H, V, D, A, R, L}.
struct AnalyzerSetting {
  char q1 = 'H';
  char q4 = 'H';

  AnalyzerSetting() = default;
  AnalyzerSetting(char a, char b) : q1(a), q4(b) {
    polarization_state(q1);  // validates
    polarization_state(q4);
  }
  friend bool operator==(const AnalyzerSetting&, const AnalyzerSetting&) = default;
  friend auto operator<=>(const AnalyzerSetting&, const AnalyzerSetting&) = default;
};

/// The 16 tomography settings {H,V,D,R} x {H,V,D,R}, q1-major.
inline std::vector<AnalyzerSetting> tomography_settings() {
  std::vector<AnalyzerSetting> out;
  for (char a : {'H', 'V', 'D', 'R'}) {
    for (char b : {'H', 'V', 'D', 'R'}) out.emplace_back(a, b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detectors

/// Coincidence pairs and the (qubit 2, qubit 3) states they register:
/// D1D4 = |0>|+>, D1D3 = |0>|->, D2D4 = |1>|+>, D2D3 = |1>|->.
enum class DetectorPair : int { D1D4 = 0, D1D3 = 1, D2D4 = 2, D2D3 = 3 };

inline constexpr std::array<DetectorPair, 4> kDetectorPairs = {DetectorPair::D1D4, DetectorPair::D1D3,
                                                               DetectorPair::D2D4, DetectorPair::D2D3};

inline int path2_of(DetectorPair p) { return static_cast<int>(p) / 2; }
inline protocol::Sign sign3_of(DetectorPair p) { return static_cast<protocol::Sign>(static_cast<int>(p) % 2); }

inline std::string to_string(DetectorPair p) {
  switch (p) {
    case DetectorPair::D1D4: return "D1D4";
    case DetectorPair::D1D3: return "D1D3";
    case DetectorPair::D2D4: return "D2D4";
    case DetectorPair::D2D3: return "D2D3";
  }
  return "?";
}

inline DetectorPair detector_pair_from_string(const std::string& s) {
  for (DetectorPair p : kDetectorPairs) {
    if (to_string(p) == s) return p;
  }
  throw InvalidArgument("unknown detector pair '" + s + "'");
}

/// The correction for each pair is carried out by rotating that pair's
/// analyzers: qubit 1 by Z when qubit 3 reads '-', qubit 4 by X when qubit 2
/// reads 1. Returns the physical analyzer states for a logical setting.
inline std::pair<PureState, PureState> physical_analyzers(const AnalyzerSetting& s, DetectorPair p) {
  PureState a1 = polarization_state(s.q1);
  PureState a4 = polarization_state(s.q4);
  if (sign3_of(p) == protocol::Sign::minus) a1 = apply(gates::pauli_z(), a1, {1});
  if (path2_of(p) == 1) a4 = apply(gates::pauli_x(), a4, {1});
  return {a1, a4};
}

// ---------------------------------------------------------------------------
// Noise

struct NoiseModel {
  double epr_visibility = 1.0;
  double mz_visibility_12 = 1.0;  // PBS1-PBS3 interferometer
  double mz_visibility_3 = 1.0;   // PBS2-BS interferometer
  double mean_counts_per_setting = 1e4;
  // Fraction of coincidences spread uniformly over all outcomes. Zero in the
  // calibrated models; 1 gives a fully depolarized record.
  double white_noise = 0.0;

  void validate() const {
    auto unit = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
    };
    unit(epr_visibility, "epr_visibility");
    unit(mz_visibility_12, "mz_visibility_12");
    unit(mz_visibility_3, "mz_visibility_3");
    unit(white_noise, "white_noise");
    if (!(mean_counts_per_setting >= 0.0) || !std::isfinite(mean_counts_per_setting)) {
      throw InvalidArgument("mean_counts_per_setting must be finite and non-negative");
    }
  }

  static NoiseModel ideal() { return {}; }

  /// Measured figures: 98.2% source visibility, ~85% interferometer visibility.
  static NoiseModel calibrated() { return {0.982, 0.85, 0.85, 1e4, 0.0}; }

  static NoiseModel fully_depolarizing() { return {1.0, 1.0, 1.0, 1e4, 1.0}; }
};

/// v |Phi+><Phi+| + (1 - v) I/4 on two polarization qubits.
inline DensityMatrix spdc_source(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw InvalidArgument("visibility must lie in [0, 1]");
  const CMatrix epr = protocol::ideal_resource().elements();
  return DensityMatrix(visibility * epr + (1.0 - visibility) * CMatrix::Identity(4, 4) / 4.0);
}

/// Path dephasing: coherences of `path_qubit` scale by `visibility`.
inline DensityMatrix mz_dephase(const DensityMatrix& rho, int path_qubit, double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw InvalidArgument("visibility must lie in [0, 1]");
  const int t[] = {path_qubit};
  const CMatrix z = embed(gates::pauli_z(), t, rho.num_qubits());
  const CMatrix out = 0.5 * (1.0 + visibility) * rho.elements() +
                      0.5 * (1.0 - visibility) * z * rho.elements() * z;
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

// ---------------------------------------------------------------------------
// End-to-end model

/// State of the four qubits just before the detectors (after PBS3, HWP3 and
/// the BS), for the given preparation and noise.
inline DensityMatrix evolve(const PrepSettings& prep, const NoiseModel& noise) {
  noise.validate();
  const Operator pbs = element_operator(Element::pbs());
  const Operator id = gates::identity();
  const Operator hwp45_in_path1 = in_arms(id, element_operator(Element::hwp(std::numbers::pi / 4)));

  // Source on polarizations (1,4); both photons start in path 0.
  const CMatrix src = gatetele::detail::kron(spdc_source(noise.epr_visibility).elements(),
                                             DensityMatrix::from_pure(PureState::basis(2, 0)).elements());
  constexpr int kFromSource[] = {1, 3, 4, 2};
  DensityMatrix rho(reorder_qubits(src, kFromSource));

  rho = apply(pbs, rho, {1, 2});             // PBS1
  rho = apply(pbs, rho, {4, 3});             // PBS2
  rho = apply(hwp45_in_path1, rho, {2, 1});  // HWP1
  rho = apply(hwp45_in_path1, rho, {3, 4});  // HWP2
  rho = apply(in_arms(prep[0].unitary(), prep[1].unitary()), rho, {2, 1});  // A1, A2
  rho = apply(in_arms(prep[2].unitary(), prep[3].unitary()), rho, {3, 4});  // A3, A4
  rho = mz_dephase(rho, 2, noise.mz_visibility_12);
  rho = mz_dephase(rho, 3, noise.mz_visibility_3);
  rho = apply(pbs, rho, {1, 2});             // PBS3: C12
  rho = apply(hwp45_in_path1, rho, {3, 4});  // HWP3: C34
  rho = apply(element_operator(Element::bs_5050()), rho, {3});  // BS
  if (noise.white_noise > 0.0) {
    rho = DensityMatrix((1.0 - noise.white_noise) * rho.elements() +
                        noise.white_noise * CMatrix::Identity(16, 16) / 16.0);
  }
  return rho;
}

/// Joint detection probabilities for one analyzer setting, indexed
/// [pair][q1 port][q4 port] with port 0 = analyzer passes, 1 = blocked.
/// All 16 entries sum to 1.
using DetectionProbabilities = std::array<std::array<std::array<double, 2>, 2>, 4>;

inline DetectionProbabilities detection_probabilities(const DensityMatrix& before_detection,
                                                      const AnalyzerSetting& setting) {
  DetectionProbabilities out{};
  const CMatrix& rho = before_detection.elements();
  for (DetectorPair pair : kDetectorPairs) {
    const auto [a1, a4] = physical_analyzers(setting, pair);
    const PureState a1_perp(CVector((CVector(2) << -std::conj(a1[1]), std::conj(a1[0])).finished()));
    const PureState a4_perp(CVector((CVector(2) << -std::conj(a4[1]), std::conj(a4[0])).finished()));
    const PureState path2 = PureState::basis(1, path2_of(pair));
    const PureState path3 = PureState::basis(1, static_cast<int>(sign3_of(pair)));
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const PureState ket = tensor(tensor(tensor(i == 0 ? a1 : a1_perp, path2), path3), j == 0 ? a4 : a4_perp);
        const double p = ket.amplitudes().dot(rho * ket.amplitudes()).real();
        out[static_cast<std::size_t>(pair)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            std::max(p, 0.0);
      }
    }
  }
  return out;
}

/// Probability that `pair` fires with both analyzers passing.
inline double coincidence_probability(const DensityMatrix& before_detection, const AnalyzerSetting& setting,
                                      DetectorPair pair) {
  return detection_probabilities(before_detection, setting)[static_cast<std::size_t>(pair)][0][0];
}

// ---------------------------------------------------------------------------
// Tables

struct CoincidenceRow {
  AnalyzerSetting setting;
  DetectorPair pair = DetectorPair::D1D4;
  std::uint64_t count = 0;
  friend bool operator==(const CoincidenceRow&, const CoincidenceRow&) = default;
};

struct ProbabilityRow {
  AnalyzerSetting setting;
  DetectorPair pair = DetectorPair::D1D4;
  double probability = 0.0;
};

struct CoincidenceTable {
  std::vector<CoincidenceRow> rows;

  /// Rows restricted to one detector pair.
  [[nodiscard]] CoincidenceTable for_pair(DetectorPair p) const {
    CoincidenceTable t;
    for (const auto& r : rows) {
      if (r.pair == p) t.rows.push_back(r);
    }
    return t;
  }

  /// Throws if a (setting, pair) combination appears twice.
  void validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (rows[i].setting == rows[j].setting && rows[i].pair == rows[j].pair) {
          throw InvalidArgument(std::string("duplicate table row for setting ") + rows[i].setting.q1 +
                                rows[i].setting.q4 + " " + to_string(rows[i].pair));
        }
      }
    }
  }

  friend bool operator==(const CoincidenceTable&, const CoincidenceTable&) = default;
};

/// Exact (pre-sampling) pass-pass probabilities for every setting and pair.
inline std::vector<ProbabilityRow> exact_run(const PrepSettings& prep, const NoiseModel& noise,
                                             std::span<const AnalyzerSetting> settings) {
  const DensityMatrix rho = evolve(prep, noise);
  std::vector<ProbabilityRow> out;
  for (const auto& s : settings) {
    const auto probs = detection_probabilities(rho, s);
    for (DetectorPair pair : kDetectorPairs) {
      out.push_back({s, pair, probs[static_cast<std::size_t>(pair)][0][0]});
    }
  }
  return out;
}

/// Poisson-sampled coincidence counts with mean probability x
/// mean_counts_per_setting. Draws come from a std::mt19937_64 seeded with
/// `seed`, in setting order then pair order, so a run is reproducible for a
/// given standard library.
inline CoincidenceTable simulate_run(const PrepSettings& prep, const NoiseModel& noise,
                                     std::span<const AnalyzerSetting> settings, std::uint64_t seed) {
  CoincidenceTable table;
  std::mt19937_64 rng(seed);
  for (const auto& row : exact_run(prep, noise, settings)) {
    const double mean = row.probability * noise.mean_counts_per_setting;
    std::uint64_t n = 0;
    if (mean > 0.0) n = static_cast<std::uint64_t>(std::poisson_distribution<std::int64_t>(mean)(rng));
    table.rows.push_back({row.setting, row.pair, n});
  }
  return table;
}

}  // namespace gatetele::optics
