#pragma once

// End-to-end experiment runs: simulate one input through the optics,
// reconstruct its output state, and run the 16-input process campaign.

#include <array>
#include <cstdint>
#include <future>
#include <map>
#include <string>
#include <vector>

#include "gatetele/core.hpp"
#include "gatetele/optics.hpp"
#include "gatetele/protocol.hpp"
#include "gatetele/tomography.hpp"

namespace gatetele::campaign {

/// Solves HWP(h) QWP(q) |H> = e^{i phi} |psi> for one polarization qubit.
///
/// A QWP at q turns |H> into an ellipse with azimuth q and ellipticity angle
/// of magnitude |q|; the HWP then mirrors the azimuth about h. Both signs of
/// the ellipticity are tried and the candidate that reproduces psi is kept.
inline optics::PrepSetting prep_for_state(const PureState& psi) {
  if (psi.num_qubits() != 1) throw DimensionError("prep_for_state expects one qubit");
  const CMatrix rho = psi.amplitudes() * psi.amplitudes().adjoint();
  const double s1 = (rho(0, 0) - rho(1, 1)).real();  // H - V
  const double s2 = 2.0 * rho(0, 1).real();          // D - A
  const double s3 = -2.0 * rho(0, 1).imag();         // R - L
  const double azimuth = 0.5 * std::atan2(s2, s1);
  const double ellipticity = 0.5 * std::atan2(s3, std::hypot(s1, s2));
  for (double q : {ellipticity, -ellipticity}) {
    for (double h : {0.5 * (azimuth + q), 0.5 * (q - azimuth)}) {
      const optics::PrepSetting p(h, q);
      if (state_fidelity(optics::prep_to_state(p), psi) > 1.0 - 1e-12) return p;
    }
  }
  throw InvalidArgument("no wave-plate setting found for the requested polarization");
}

/// Splits a two-qubit product state into its factors; throws if entangled.
inline std::pair<PureState, PureState> factor_product(const PureState& psi) {
  const Eigen::Vector2d s = tomography::schmidt_coefficients(psi);
  if (s(1) > 1e-9) throw InvalidArgument("the optics can only prepare product inputs");
  Eigen::Matrix2cd m;
  m << psi[0], psi[1], psi[2], psi[3];
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {PureState::normalized(svd.matrixU().col(0)), PureState::normalized(svd.matrixV().col(0).conjugate())};
}

inline optics::PrepSettings prep_for_product(const PureState& psi) {
  const auto [a, b] = factor_product(psi);
  const optics::PrepSetting pa = prep_for_state(a);
  const optics::PrepSetting pb = prep_for_state(b);
  return {pa, pa, pb, pb};
}

/// Seed for the k-th cell of a campaign derived from a base seed.
inline std::uint64_t derived_seed(std::uint64_t base, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct InputResult {
  std::string label;
  tomography::StateTomoResult tomo;
  PureState target = PureState::basis(2, 0);
};

/// Setting weights for one input: exact probabilities or Poisson counts,
/// pooled over the four detector pairs.
inline tomography::SettingWeights measure_input(const optics::PrepSettings& prep, const optics::NoiseModel& noise,
                                                bool exact, std::uint64_t seed) {
  const auto settings = optics::tomography_settings();
  if (exact) {
    const auto rows = optics::exact_run(prep, noise, settings);
    return tomography::weights_from_probabilities(rows);
  }
  return tomography::weights_from_counts(optics::simulate_run(prep, noise, settings, seed));
}

inline InputResult run_input(const PureState& input, const std::string& label, const optics::NoiseModel& noise,
                             bool exact, std::uint64_t seed) {
  InputResult r;
  r.label = label;
  r.tomo = tomography::state_tomo_detailed(measure_input(prep_for_product(input), noise, exact, seed));
  r.target = protocol::target_output(input);
  return r;
}

inline InputResult run_input(const std::string& label, const optics::NoiseModel& noise, bool exact,
                             std::uint64_t seed) {
  return run_input(tomography::tomo_input_state(label), label, noise, exact, seed);
}

struct ProcessCampaign {
  std::vector<InputResult> inputs;  // in kTomoInputLabels order
  tomography::ProcessTomoResult process;
  double f_p = 0.0;
  double f_bar = 0.0;
};

/// The 16 x 16 campaign. Inputs run concurrently, each with its own derived
/// seed, and results are collected in label order.
inline ProcessCampaign run_process_campaign(const optics::NoiseModel& noise, bool exact, std::uint64_t seed) {
  std::vector<std::future<InputResult>> jobs;
  for (std::size_t k = 0; k < tomography::kTomoInputLabels.size(); ++k) {
    jobs.push_back(std::async(std::launch::async, [&noise, exact, seed, k] {
      return run_input(tomography::kTomoInputLabels[k], noise, exact, derived_seed(seed, k));
    }));
  }
  ProcessCampaign c;
  std::map<std::string, CMatrix> outputs;
  for (auto& j : jobs) {
    c.inputs.push_back(j.get());
    outputs.emplace(c.inputs.back().label, c.inputs.back().tomo.rho.elements());
  }
  c.process = tomography::process_tomo_detailed(outputs);
  c.f_p = tomography::process_fidelity(c.process.chi, tomography::chi_for_unitary(gates::cnot()));
  c.f_bar = tomography::average_gate_fidelity(std::min(c.f_p, 1.0), 4);
  return c;
}

/// Source visibility at which the exact campaign reaches `target_fp` for the
/// given interferometer visibilities (bisection; F_P rises with visibility).
inline double calibrate_epr_visibility(double target_fp, double mz12, double mz3, double tol = 1e-10) {
  auto fp_at = [&](double v) {
    return run_process_campaign({v, mz12, mz3, 1.0, 0.0}, true, 0).f_p;
  };
  double lo = 0.0;
  double hi = 1.0;
  if (target_fp < fp_at(lo) || target_fp > fp_at(hi)) {
    throw InvalidArgument("target process fidelity is not reachable with these interferometer visibilities");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (fp_at(mid) < target_fp ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace gatetele::campaign
