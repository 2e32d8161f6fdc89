#pragma once

// CNOT gate teleportation on the register (1,2,3,4).
//
// Alice holds qubits 1 and 2, Bob holds 3 and 4, and the resource pair sits
// on (2,3). After the local gates C12 and C34, qubit 2 is measured in
// {|0>,|1>} and qubit 3 in {|+>,|->}. The branch (m2, m3) leaves qubits
// (1,4) in K C14|psi>, with K from {I, Z1, X4, -Z1 X4}; applying the same K
// (each is its own inverse) restores C14|psi>.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gatetele/core.hpp"

namespace gatetele::protocol {

enum class Sign : int { plus = 0, minus = 1 };

inline char sign_char(Sign s) { return s == Sign::plus ? '+' : '-'; }

/// Correction operator on (1,4) for measurement outcome (m2, m3).
inline Operator correction_for(int m2, Sign m3) {
  if (m2 != 0 && m2 != 1) throw InvalidArgument("m2 must be 0 or 1");
  const Operator z1 = tensor(gates::pauli_z(), gates::identity());
  const Operator x4 = tensor(gates::identity(), gates::pauli_x());
  if (m2 == 0) return m3 == Sign::plus ? gates::identity(2) : z1;
  return m3 == Sign::plus ? x4 : Complex(-1.0) * (z1 * x4);
}

struct CorrectionRule {
  int m2 = 0;
  Sign m3 = Sign::plus;
  Operator op;
};

inline std::array<CorrectionRule, 4> correction_table() {
  return {CorrectionRule{0, Sign::plus, correction_for(0, Sign::plus)},
          CorrectionRule{0, Sign::minus, correction_for(0, Sign::minus)},
          CorrectionRule{1, Sign::plus, correction_for(1, Sign::plus)},
          CorrectionRule{1, Sign::minus, correction_for(1, Sign::minus)}};
}

/// One measurement branch. `output` is the (1,4) state with the correction
/// already applied; it is pure whenever the resource is pure.
struct BranchOutcome {
  int m2 = 0;
  Sign m3 = Sign::plus;
  double probability = 0.0;
  DensityMatrix output = DensityMatrix::maximally_mixed(2);
};

/// (|00> + |11>)/sqrt2 on (2,3).
inline DensityMatrix ideal_resource() {
  CVector v = CVector::Zero(4);
  v(0) = v(3) = 1.0 / std::numbers::sqrt2;
  return DensityMatrix::from_pure(PureState(v));
}

/// C14|psi>: the state a perfect teleported gate should produce.
inline PureState target_output(const PureState& input14) {
  if (input14.num_qubits() != 2) throw DimensionError("input must be a two-qubit state on (1,4)");
  return apply(gates::cnot(), input14, {1, 2});
}

namespace detail {
// input on (1,4) tensored with resource on (2,3), laid out as (1,4,2,3).
inline constexpr int kFromInputResource[] = {1, 3, 4, 2};
}  // namespace detail

/// input14 on qubits (1,4) and resource on (2,3), ordered (1,2,3,4).
inline DensityMatrix prepare_joint(const PureState& input14, const DensityMatrix& resource) {
  if (input14.num_qubits() != 2 || resource.num_qubits() != 2) {
    throw DimensionError("prepare_joint expects two-qubit input and two-qubit resource");
  }
  const CMatrix prod = gatetele::detail::kron(DensityMatrix::from_pure(input14).elements(), resource.elements());
  return DensityMatrix(reorder_qubits(prod, detail::kFromInputResource));
}

/// C12 followed by C34.
inline DensityMatrix run_local_gates(const DensityMatrix& joint) {
  if (joint.num_qubits() != 4) throw DimensionError("run_local_gates expects a four-qubit state");
  return apply(gates::cnot(), apply(gates::cnot(), joint, {1, 2}), {3, 4});
}

/// Projects qubits 2 and 3 of the post-gate state onto (m2, m3) and applies
/// the matching correction to (1,4).
inline BranchOutcome measure_branch(const DensityMatrix& post_gates, int m2, Sign m3) {
  const int t2[] = {2};
  const int t3[] = {3};
  const CMatrix p = embed(basis_projector(Basis::computational, m2), t2, 4) *
                    embed(basis_projector(Basis::diagonal, static_cast<int>(m3)), t3, 4);
  const CMatrix projected = p * post_gates.elements() * p.adjoint();
  const double prob = std::max(projected.trace().real(), 0.0);
  BranchOutcome out{m2, m3, prob, DensityMatrix::maximally_mixed(2)};
  if (prob < kImpossibleBranch) return out;
  const int keep[] = {1, 4};
  const CMatrix reduced = partial_trace(projected, keep, 4) / prob;
  const CMatrix k = correction_for(m2, m3).elements();
  const CMatrix corrected = k * reduced * k.adjoint();
  out.output = DensityMatrix(0.5 * (corrected + corrected.adjoint()));
  return out;
}

/// Classical message sent between the parties during a run.
struct ClassicalMessage {
  std::string from;
  std::string to;
  int bit = 0;
};

enum class Mode { enumerate, sample };

/// Record of a protocol run: its branches and the resources it consumed.
struct TeleportRun {
  Mode mode = Mode::enumerate;
  std::vector<BranchOutcome> branches;
  int resource_pairs = 0;
  std::vector<ClassicalMessage> messages;
};

/// All four branches at the density-matrix level.
inline TeleportRun teleport_enumerate(const PureState& input14, const DensityMatrix& resource) {
  const DensityMatrix post = run_local_gates(prepare_joint(input14, resource));
  TeleportRun run;
  run.mode = Mode::enumerate;
  run.resource_pairs = 1;
  for (int m2 : {0, 1}) {
    for (Sign m3 : {Sign::plus, Sign::minus}) run.branches.push_back(measure_branch(post, m2, m3));
  }
  // Each branch announces m2 to Bob (X4 correction) and m3 to Alice (Z1).
  run.messages = {{"alice", "bob", 0}, {"bob", "alice", 0}};
  return run;
}

/// One branch drawn with a std::mt19937_64 seeded by `seed`.
inline TeleportRun teleport_sample(const PureState& input14, const DensityMatrix& resource, std::uint64_t seed) {
  TeleportRun all = teleport_enumerate(input14, resource);
  std::vector<double> w;
  for (const auto& b : all.branches) w.push_back(b.probability);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  const BranchOutcome chosen = all.branches[pick(rng)];
  TeleportRun run;
  run.mode = Mode::sample;
  run.resource_pairs = 1;
  run.messages = {{"alice", "bob", chosen.m2}, {"bob", "alice", static_cast<int>(chosen.m3)}};
  run.branches = {chosen};
  return run;
}

struct CommunicationCost {
  int ebits = 0;
  int cbits = 0;
};

/// Entanglement and classical bits consumed by a completed run.
inline CommunicationCost communication_cost(const TeleportRun& run) {
  if (run.branches.empty()) throw InvalidArgument("communication_cost needs a completed run");
  return {run.resource_pairs, static_cast<int>(run.messages.size())};
}

struct IdentityReport {
  double max_deviation = 0.0;
  CVector lhs;
  CVector rhs;
};

/// Evaluates both sides of the gate-teleportation identity on amplitudes:
///   C34 C12 (|psi>_14 (x) |Phi>_23)
///     = 1/2 sum_{m2,m3} |m2 m3>_23 (x) K_{m2 m3} C14 |psi>_14
/// with K in {I, Z1, X4, -Z1 X4}. Returns the largest componentwise gap.
inline IdentityReport verify_identity(const PureState& input14) {
  if (input14.num_qubits() != 2) throw DimensionError("input must be a two-qubit state on (1,4)");
  CVector phi = CVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::numbers::sqrt2;

  const PureState joint(reorder_qubits(CVector(gatetele::detail::kron(input14.amplitudes(), phi)),
                                       detail::kFromInputResource));
  const PureState lhs = apply(gates::cnot(), apply(gates::cnot(), joint, {1, 2}), {3, 4});

  const PureState gated = target_output(input14);
  CVector rhs = CVector::Zero(16);
  // (2,3,1,4) -> (1,2,3,4)
  constexpr int kFromPair[] = {3, 1, 2, 4};
  for (int m2 : {0, 1}) {
    for (Sign m3 : {Sign::plus, Sign::minus}) {
      const PureState pair = tensor(basis_vector(Basis::computational, m2),
                                    basis_vector(Basis::diagonal, static_cast<int>(m3)));
      const CVector branch = correction_for(m2, m3).elements() * gated.amplitudes();
      rhs += 0.5 * reorder_qubits(CVector(gatetele::detail::kron(pair.amplitudes(), branch)), kFromPair);
    }
  }
  IdentityReport rep;
  rep.max_deviation = (lhs.amplitudes() - rhs).cwiseAbs().maxCoeff();
  rep.lhs = lhs.amplitudes();
  rep.rhs = std::move(rhs);
  return rep;
}

}  // namespace gatetele::protocol
