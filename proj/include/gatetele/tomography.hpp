#pragma once

// State tomography from 16 analyzer settings, chi-matrix process tomography
// from 16 product inputs, and the fidelity figures built on them.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gatetele/core.hpp"
#include "gatetele/optics.hpp"

namespace gatetele::tomography {

inline constexpr double kPostProjectionFloor = -1e-12;

// ---------------------------------------------------------------------------
// Physicality restoration

/// Nearest unit-trace positive semidefinite matrix in Frobenius norm:
/// negative eigenvalues are zeroed and their weight spread evenly over the
/// remaining ones (Smolin, Gambetta, Smith). A matrix that is already
/// physical comes back unchanged.
inline CMatrix project_to_physical(const CMatrix& raw) {
  if (raw.rows() != raw.cols()) throw DimensionError("projection needs a square matrix");
  CMatrix h = 0.5 * (raw + raw.adjoint());
  const double tr = h.trace().real();
  if (!(tr > 0.0)) throw ReconstructionError("reconstructed matrix has non-positive trace");
  h /= tr;

  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  Eigen::VectorXd lambda = es.eigenvalues();  // ascending
  if (lambda.minCoeff() >= 0.0) return h;

  const Eigen::Index d = lambda.size();
  double spill = 0.0;
  Eigen::Index kept = d;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (lambda(i) + spill / static_cast<double>(kept) >= 0.0) break;
    spill += lambda(i);
    lambda(i) = 0.0;
    --kept;
  }
  for (Eigen::Index i = d - kept; i < d; ++i) lambda(i) += spill / static_cast<double>(kept);
  CMatrix out = es.eigenvectors() * lambda.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint());
}

// ---------------------------------------------------------------------------
// State tomography

using SettingWeights = std::map<optics::AnalyzerSetting, double>;

/// Per-setting totals summed over the chosen detector pairs (all four when
/// `pairs` is empty).
inline SettingWeights weights_from_counts(const optics::CoincidenceTable& table,
                                          std::span<const optics::DetectorPair> pairs = {}) {
  table.validate();
  SettingWeights w;
  for (const auto& r : table.rows) {
    if (!pairs.empty() && std::find(pairs.begin(), pairs.end(), r.pair) == pairs.end()) continue;
    w[r.setting] += static_cast<double>(r.count);
  }
  return w;
}

inline SettingWeights weights_from_probabilities(std::span<const optics::ProbabilityRow> rows,
                                                 std::span<const optics::DetectorPair> pairs = {}) {
  SettingWeights w;
  for (const auto& r : rows) {
    if (!pairs.empty() && std::find(pairs.begin(), pairs.end(), r.pair) == pairs.end()) continue;
    w[r.setting] += r.probability;
  }
  return w;
}

namespace detail {
// Bloch components (1, <X>, <Y>, <Z>) of the projectors H, V, D, R.
inline Eigen::Matrix4d analyzer_bloch_rows() {
  Eigen::Matrix4d t;
  t << 1, 0, 0, 1,   //
      1, 0, 0, -1,   //
      1, 1, 0, 0,    //
      1, 0, 1, 0;
  return t;
}

inline int analyzer_index(char c) {
  switch (c) {
    case 'H': return 0;
    case 'V': return 1;
    case 'D': return 2;
    case 'R': return 3;
    default: return -1;
  }
}

/// sigma_a (x) sigma_b for m = 4a + b.
inline CMatrix pauli_product(int m) {
  return gatetele::detail::kron(gates::pauli(m / 4).elements(), gates::pauli(m % 4).elements());
}
}  // namespace detail

/// Linear inversion of the 16 {H,V,D,R}^2 settings into a unit-trace
/// Hermitian matrix (not necessarily positive).
///
/// With p_ab = Tr[rho (P_a (x) P_b)] and rho = 1/4 sum_ij r_ij s_i (x) s_j,
/// the data matrix is P = 1/4 T r T^t for the 4x4 Bloch table T, so
/// r = 4 T^-1 P T^-t, rescaled to r_00 = 1.
inline CMatrix linear_inversion(const SettingWeights& weights) {
  Eigen::Matrix4d p = Eigen::Matrix4d::Constant(-1.0);
  double total = 0.0;
  for (const auto& [s, w] : weights) {
    const int a = detail::analyzer_index(s.q1);
    const int b = detail::analyzer_index(s.q4);
    if (a < 0 || b < 0) continue;
    if (!(w >= 0.0)) throw ReconstructionError("negative or NaN setting weight");
    p(a, b) = w;
    total += w;
  }
  if ((p.array() < 0.0).any()) throw ReconstructionError("state tomography needs all 16 {H,V,D,R}^2 settings");
  if (!(total > 0.0)) throw ReconstructionError("all setting counts are zero");

  const Eigen::Matrix4d t_inv = detail::analyzer_bloch_rows().inverse();
  const Eigen::Matrix4d r = 4.0 * t_inv * p * t_inv.transpose();
  if (!(r(0, 0) > 0.0)) throw ReconstructionError("reconstructed trace is not positive");
  CMatrix rho = CMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) rho += (r(i, j) / r(0, 0)) * detail::pauli_product(4 * i + j);
  }
  return rho / 4.0;
}

enum class Estimator { linear, max_likelihood };

struct MleOptions {
  int max_iterations = 2000;
  double tolerance = 1e-10;    // largest entry change between iterations
  double start_mixing = 0.01;  // white-noise weight added to the start
};

/// Iterative maximum-likelihood refinement (R rho R) for Poisson counts on
/// the 16 product projectors. The projectors do not sum to the identity, so
/// each step is rho <- G^-1 R rho R G^-1 with G = sum_s Pi_s and
/// R = sum_s (n_s / p_s) Pi_s, then renormalized. The start is mixed with a
/// little white noise so the iteration can leave a rank-deficient support.
/// Exact probabilities of a physical state are a fixed point. Convergence is
/// linear at best, so the iteration cap makes this an approximation to the
/// maximum-likelihood point, well inside the statistical error.
inline CMatrix mle_refine(const SettingWeights& weights, const CMatrix& start, const MleOptions& opt = {},
                          int* iterations = nullptr) {
  std::vector<std::pair<CMatrix, double>> terms;
  CMatrix g = CMatrix::Zero(4, 4);
  for (const auto& [s, n] : weights) {
    const CVector k = tensor(polarization_state(s.q1), polarization_state(s.q4)).amplitudes();
    terms.emplace_back(k * k.adjoint(), n);
    g += terms.back().first;
  }
  const CMatrix g_inv = g.inverse();
  CMatrix rho = (1.0 - opt.start_mixing) * start + opt.start_mixing * CMatrix::Identity(4, 4) / 4.0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    CMatrix r = CMatrix::Zero(4, 4);
    for (const auto& [proj, n] : terms) {
      if (n == 0.0) continue;
      const double p = (proj * rho).trace().real();
      if (p > 0.0) r += (n / p) * proj;
    }
    CMatrix next = g_inv * r * rho * r * g_inv;
    next = 0.5 * (next + next.adjoint());
    next /= next.trace().real();
    const double change = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
    if (change < opt.tolerance) break;
  }
  if (iterations != nullptr) *iterations = it;
  return rho;
}

// Linear estimates with eigenvalues above -kRefineThreshold count as physical.
inline constexpr double kRefineThreshold = 1e-10;

struct StateTomoResult {
  CMatrix raw;  // linear inversion, before any physicality step
  DensityMatrix rho = DensityMatrix::maximally_mixed(2);
  int mle_iterations = 0;
};

/// Linear inversion, projection to the nearest physical state, and (by
/// default) maximum-likelihood refinement from there. Sixteen settings fix the
/// fifteen state parameters and the count rate, so a physical linear estimate
/// already reproduces the data and is itself the maximum-likelihood point;
/// refinement only runs when the linear estimate has a negative eigenvalue.
inline StateTomoResult state_tomo_detailed(const SettingWeights& weights,
                                           Estimator estimator = Estimator::max_likelihood) {
  StateTomoResult out;
  out.raw = linear_inversion(weights);
  const CMatrix projected = project_to_physical(out.raw);
  if (estimator == Estimator::linear || check_physicality(out.raw).min_eigenvalue >= -kRefineThreshold) {
    out.rho = DensityMatrix(projected);
    return out;
  }
  const CMatrix refined = mle_refine(weights, projected, {}, &out.mle_iterations);
  out.rho = DensityMatrix(project_to_physical(refined));
  return out;
}

inline DensityMatrix state_tomo(const SettingWeights& weights, Estimator estimator = Estimator::max_likelihood) {
  return state_tomo_detailed(weights, estimator).rho;
}

inline DensityMatrix state_tomo(const optics::CoincidenceTable& table,
                                std::span<const optics::DetectorPair> pairs = {}) {
  return state_tomo(weights_from_counts(table, pairs));
}

/// Exact pass probabilities Tr[rho (P_a (x) P_b)] for the 16 settings.
inline SettingWeights forward_model(const DensityMatrix& rho) {
  if (rho.num_qubits() != 2) throw DimensionError("forward_model expects a two-qubit state");
  SettingWeights w;
  for (const auto& s : optics::tomography_settings()) {
    const PureState k = tensor(polarization_state(s.q1), polarization_state(s.q4));
    w[s] = std::max(k.amplitudes().dot(rho.elements() * k.amplitudes()).real(), 0.0);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Process tomography

inline constexpr std::array<const char*, 16> kTomoInputLabels = {
    "HH", "HV", "HD", "HR", "VH", "VV", "VD", "VR", "DH", "DV", "DD", "DR", "RH", "RV", "RD", "RR"};

inline PureState tomo_input_state(const std::string& label) {
  if (label.size() != 2) throw InvalidArgument("input label must name two polarizations, got '" + label + "'");
  return tensor(polarization_state(label[0]), polarization_state(label[1]));
}

/// 16x16 process matrix in the basis {I,X,Y,Z} (x) {I,X,Y,Z}, index 4a + b,
/// with E(rho) = sum_mn chi_mn P_m rho P_n and Tr chi = 1.
class ChiMatrix {
 public:
  explicit ChiMatrix(CMatrix elements) : chi_(std::move(elements)) {
    if (chi_.rows() != 16 || chi_.cols() != 16) throw DimensionError("chi matrix must be 16x16");
    const PhysicalityReport r = check_physicality(chi_);
    if (r.hermiticity_error > kHermTol) throw InvalidArgument("chi matrix is not Hermitian");
    if (r.trace_error > kTraceTol) throw InvalidArgument("chi matrix trace is not 1");
    if (r.min_eigenvalue < -kPsdTol) throw InvalidArgument("chi matrix is not positive semidefinite");
  }

  [[nodiscard]] const CMatrix& elements() const noexcept { return chi_; }
  [[nodiscard]] Complex operator()(Eigen::Index r, Eigen::Index c) const { return chi_(r, c); }

 private:
  CMatrix chi_;
};

namespace detail {
// Pauli expansion coefficients c_m = Tr(P_m K) / 4 of a two-qubit operator.
inline CVector pauli_coefficients(const CMatrix& k) {
  CVector c(16);
  for (int m = 0; m < 16; ++m) c(m) = (pauli_product(m).adjoint() * k).trace() / 4.0;
  return c;
}

// chi_mn = <v_m| J |v_n> / d^2, with J the (input (x) output) Choi matrix and
// v_m[i d + k] = (P_m)_{k i}.
inline CMatrix chi_from_choi(const CMatrix& choi) {
  constexpr int d = 4;
  CMatrix v(d * d, 16);
  for (int m = 0; m < 16; ++m) {
    const CMatrix p = pauli_product(m);
    for (int i = 0; i < d; ++i) {
      for (int k = 0; k < d; ++k) v(i * d + k, m) = p(k, i);
    }
  }
  return v.adjoint() * choi * v / static_cast<double>(d * d);
}
}  // namespace detail

/// Rank-one chi of a two-qubit unitary.
inline ChiMatrix chi_for_unitary(const Operator& u) {
  if (u.dim() != 4 || !u.is_unitary()) throw InvalidArgument("chi_for_unitary expects a two-qubit unitary");
  const CVector c = detail::pauli_coefficients(u.elements());
  return ChiMatrix(c * c.adjoint());
}

/// chi of sum_k K rho K^dagger.
inline CMatrix chi_from_kraus(std::span<const CMatrix> kraus) {
  CMatrix chi = CMatrix::Zero(16, 16);
  for (const auto& k : kraus) {
    const CVector c = detail::pauli_coefficients(k);
    chi += c * c.adjoint();
  }
  return chi;
}

/// chi of an arbitrary linear map on 4x4 matrices, through its Choi matrix.
inline CMatrix chi_from_map(const std::function<CMatrix(const CMatrix&)>& channel) {
  CMatrix choi = CMatrix::Zero(16, 16);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CMatrix eij = CMatrix::Zero(4, 4);
      eij(i, j) = 1.0;
      choi += gatetele::detail::kron(eij, channel(eij));
    }
  }
  return detail::chi_from_choi(choi);
}

inline CMatrix apply_chi(const CMatrix& chi, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(4, 4);
  std::array<CMatrix, 16> p;
  for (int m = 0; m < 16; ++m) p[static_cast<std::size_t>(m)] = detail::pauli_product(m);
  for (int m = 0; m < 16; ++m) {
    const CMatrix left = p[static_cast<std::size_t>(m)] * rho;
    for (int n = 0; n < 16; ++n) {
      if (chi(m, n) == Complex(0.0)) continue;
      out += chi(m, n) * left * p[static_cast<std::size_t>(n)].adjoint();
    }
  }
  return out;
}

struct ProcessTomoResult {
  CMatrix raw;
  ChiMatrix chi = ChiMatrix(CMatrix::Identity(16, 16) / 16.0);
  double max_reproduction_error = 0.0;
};

/// Linear inversion over the 16 product inputs, then projection to a
/// positive unit-trace chi. `outputs` is keyed by input label ("HH" ... "RR").
inline ProcessTomoResult process_tomo_detailed(const std::map<std::string, CMatrix>& outputs) {
  CMatrix inputs(16, 16);  // column k = vec(rho_k), row-major flattening
  std::array<CMatrix, 16> outs;
  for (std::size_t k = 0; k < kTomoInputLabels.size(); ++k) {
    const std::string label = kTomoInputLabels[k];
    const auto it = outputs.find(label);
    if (it == outputs.end()) throw ReconstructionError("process tomography is missing input " + label);
    if (it->second.rows() != 4 || it->second.cols() != 4) {
      throw DimensionError("output for " + label + " is not a two-qubit matrix");
    }
    if (!check_physicality(it->second).passes()) {
      throw ReconstructionError("output for " + label + " is not a physical density matrix");
    }
    outs[k] = it->second;
    const CVector psi = tomo_input_state(label).amplitudes();
    const CMatrix rho = psi * psi.adjoint();
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) inputs(r * 4 + c, static_cast<Eigen::Index>(k)) = rho(r, c);
    }
  }

  // |i><j| = sum_k lambda_k rho_k, so E(|i><j|) = sum_k lambda_k E(rho_k).
  const Eigen::PartialPivLU<CMatrix> lu(inputs);
  CMatrix choi = CMatrix::Zero(16, 16);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CVector e = CVector::Zero(16);
      e(i * 4 + j) = 1.0;
      const CVector lambda = lu.solve(e);
      CMatrix image = CMatrix::Zero(4, 4);
      for (std::size_t k = 0; k < 16; ++k) image += lambda(static_cast<Eigen::Index>(k)) * outs[k];
      CMatrix eij = CMatrix::Zero(4, 4);
      eij(i, j) = 1.0;
      choi += gatetele::detail::kron(eij, image);
    }
  }

  ProcessTomoResult res;
  res.raw = detail::chi_from_choi(choi);
  res.chi = ChiMatrix(project_to_physical(res.raw));
  for (std::size_t k = 0; k < 16; ++k) {
    const CVector psi = tomo_input_state(kTomoInputLabels[k]).amplitudes();
    const CMatrix predicted = apply_chi(res.chi.elements(), psi * psi.adjoint());
    res.max_reproduction_error = std::max(res.max_reproduction_error, trace_distance(predicted, outs[k]));
  }
  return res;
}

inline ChiMatrix process_tomo(const std::map<std::string, CMatrix>& outputs) {
  return process_tomo_detailed(outputs).chi;
}

inline ChiMatrix process_tomo(const std::map<std::string, DensityMatrix>& outputs) {
  std::map<std::string, CMatrix> raw;
  for (const auto& [k, v] : outputs) raw.emplace(k, v.elements());
  return process_tomo(raw);
}

// ---------------------------------------------------------------------------
// Figures of merit

/// Tr(chi_meas chi_ideal); the process fidelity when chi_ideal is rank one.
inline double process_fidelity(const ChiMatrix& measured, const ChiMatrix& ideal) {
  const double f = (measured.elements() * ideal.elements()).trace().real();
  return std::clamp(f, 0.0, 1.0 + kHermTol);
}

/// (d F_P + 1) / (d + 1).
inline double average_gate_fidelity(double process_fid, int d) {
  if (d < 2) throw InvalidArgument("dimension must be at least 2");
  if (!(process_fid >= 0.0 && process_fid <= 1.0 + kHermTol)) {
    throw InvalidArgument("process fidelity must lie in [0, 1]");
  }
  return (d * process_fid + 1.0) / (d + 1.0);
}

struct WitnessResult {
  double f_s = 0.0;
  bool entangled = false;
};

/// Schmidt coefficients of a two-qubit pure state, descending.
inline Eigen::Vector2d schmidt_coefficients(const PureState& psi) {
  if (psi.num_qubits() != 2) throw DimensionError("Schmidt decomposition here is for two qubits");
  Eigen::Matrix2cd m;
  m << psi[0], psi[1], psi[2], psi[3];
  return Eigen::JacobiSVD<Eigen::Matrix2cd>(m).singularValues();
}

/// Fidelity to a maximally entangled target; F > 1/2 certifies entanglement.
inline WitnessResult entanglement_witness(const DensityMatrix& rho, const PureState& target) {
  const Eigen::Vector2d s = schmidt_coefficients(target);
  const double h = 1.0 / std::numbers::sqrt2;
  if (std::abs(s(0) - h) > 1e-10 || std::abs(s(1) - h) > 1e-10) {
    throw InvalidArgument("witness target must be maximally entangled");
  }
  const double f = state_fidelity(rho, target);
  return {f, f > 0.5};
}

}  // namespace gatetele::tomography
