#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "gatetele/optics.hpp"
#include "gatetele/protocol.hpp"
#include "gatetele/tomography.hpp"

using namespace gatetele;
using namespace gatetele::protocol;

namespace {

const double kS = 1.0 / std::numbers::sqrt2;

CMatrix literal(std::initializer_list<std::initializer_list<Complex>> rows) {
  CMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (const auto& v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

// (|HR> - |VL>)/sqrt2 = (1, i, -1, i)/2, written out by hand.
PureState featured_output() {
  CVector v(4);
  v << 0.5, Complex(0, 0.5), -0.5, Complex(0, 0.5);
  return PureState(v);
}

}  // namespace

TEST(Corrections, TableIsExactlyTheFourPaulis) {
  const CMatrix id = CMatrix::Identity(4, 4);
  const CMatrix z1 = literal({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}});
  const CMatrix x4 = literal({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
  const CMatrix mzx = literal({{0, -1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
  const auto table = correction_table();
  EXPECT_EQ(table[0].m2, 0);
  EXPECT_EQ(table[0].m3, Sign::plus);
  EXPECT_LE((table[0].op.elements() - id).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(table[1].m3, Sign::minus);
  EXPECT_LE((table[1].op.elements() - z1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(table[2].m2, 1);
  EXPECT_LE((table[2].op.elements() - x4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((table[3].op.elements() - mzx).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(correction_for(2, Sign::plus), InvalidArgument);
}

TEST(PrepareJoint, BasisInputGivesPathEntangledState) {
  const DensityMatrix joint = prepare_joint(tomography::tomo_input_state("HH"), ideal_resource());
  CVector expected = CVector::Zero(16);
  expected(0b0000) = expected(0b0110) = kS;
  EXPECT_NEAR(state_fidelity(joint, PureState(expected)), 1.0, 1e-14);
}

TEST(PrepareJoint, CircularInputHasEightEqualAmplitudes) {
  const DensityMatrix joint = prepare_joint(tomography::tomo_input_state("RR"), ideal_resource());
  int nonzero = 0;
  for (Eigen::Index i = 0; i < 16; ++i) {
    const double p = joint(i, i).real();
    if (p > 1e-14) {
      ++nonzero;
      EXPECT_NEAR(p, 1.0 / 8.0, 1e-14);
    }
  }
  EXPECT_EQ(nonzero, 8);
  EXPECT_NEAR((joint.elements() * joint.elements()).trace().real(), 1.0, 1e-14);  // pure
}

TEST(PrepareJoint, MixedResourceIsProduct) {
  const DensityMatrix joint = prepare_joint(tomography::tomo_input_state("HH"), DensityMatrix::maximally_mixed(2));
  // |H>_1 |H>_4 with I/4 on (2,3): diagonal 1/4 on indices 0 q2 q3 0.
  for (Eigen::Index i = 0; i < 16; ++i) {
    const bool support = (i & 0b1001) == 0;
    EXPECT_NEAR(joint(i, i).real(), support ? 0.25 : 0.0, 1e-15);
  }
  EXPECT_THROW(prepare_joint(PureState::basis(1, 0), ideal_resource()), DimensionError);
}

TEST(LocalGates, HandExpansionForBasisInput) {
  // C34 C12 |0>_1 (|00> + |11>)_23 |0>_4 / sqrt2 = (|0000> + |0111>) / sqrt2.
  const DensityMatrix post = run_local_gates(prepare_joint(tomography::tomo_input_state("HH"), ideal_resource()));
  CVector expected = CVector::Zero(16);
  expected(0b0000) = expected(0b0111) = kS;
  EXPECT_NEAR(state_fidelity(post, PureState(expected)), 1.0, 1e-14);
}

TEST(LocalGates, CnotIsAnInvolution) {
  std::mt19937_64 rng(3);
  const DensityMatrix joint = prepare_joint(haar_random_state(2, rng), ideal_resource());
  const DensityMatrix twice = apply(gates::cnot(), apply(gates::cnot(), joint, {1, 2}), {1, 2});
  EXPECT_LE((twice.elements() - joint.elements()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LocalGates, MaximallyMixedIsFixed) {
  const DensityMatrix m = DensityMatrix::maximally_mixed(4);
  EXPECT_LE((run_local_gates(m).elements() - m.elements()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LocalGates, PreserveSpectrumProperty) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix in = prepare_joint(haar_random_state(2, rng), optics::spdc_source(0.7));
    const DensityMatrix out = run_local_gates(in);
    Eigen::SelfAdjointEigenSolver<CMatrix> a(in.elements()), b(out.elements());
    EXPECT_LE((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(out.elements().trace().real(), 1.0, 1e-12);
  }
}

TEST(LocalGates, MarginalIsEqualMixtureOfBranches) {
  // Oracle: (1/4) sum_K K C14 psi psi^dag C14^dag K^dag from literal Paulis.
  const CMatrix cnot = literal({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
  const CMatrix z1 = literal({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}});
  const CMatrix x4 = literal({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const PureState psi = haar_random_state(2, rng);
    const CVector g = cnot * psi.amplitudes();
    CMatrix expected = CMatrix::Zero(4, 4);
    for (const CMatrix& k : {CMatrix(CMatrix::Identity(4, 4)), z1, x4, CMatrix(-z1 * x4)}) {
      expected += 0.25 * (k * g) * (k * g).adjoint();
    }
    const DensityMatrix post = run_local_gates(prepare_joint(psi, ideal_resource()));
    const DensityMatrix marginal = partial_trace(post, {1, 4});
    EXPECT_LE((marginal.elements() - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(LocalGates, QubitTwoOutcomesAreEvenProperty) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const PureState post(verify_identity(haar_random_state(2, rng)).lhs);
    EXPECT_NEAR(project_measure(post, 2, Basis::computational, 0).probability, 0.5, 1e-12);
    EXPECT_NEAR(project_measure(post, 2, Basis::computational, 1).probability, 0.5, 1e-12);
  }
}

TEST(Teleport, FeaturedInputGivesEntangledOutput) {
  const TeleportRun run = teleport_enumerate(tomography::tomo_input_state("RR"), ideal_resource());
  ASSERT_EQ(run.branches.size(), 4u);
  const PureState target = featured_output();
  EXPECT_NEAR(state_fidelity(target_output(tomography::tomo_input_state("RR")), target), 1.0, 1e-14);
  for (const auto& b : run.branches) {
    EXPECT_NEAR(b.probability, 0.25, 1e-12);
    EXPECT_NEAR(state_fidelity(b.output, target), 1.0, 1e-12);
  }
}

TEST(Teleport, BasisInputsFollowTruthTable) {
  for (auto [in, out] : {std::pair{"HH", 0b00}, std::pair{"VH", 0b11}, std::pair{"HV", 0b01}, std::pair{"VV", 0b10}}) {
    const TeleportRun run = teleport_enumerate(tomography::tomo_input_state(in), ideal_resource());
    for (const auto& b : run.branches) {
      EXPECT_NEAR(state_fidelity(b.output, PureState::basis(2, out)), 1.0, 1e-12) << in;
    }
  }
}

TEST(Teleport, CorrectionCorrectnessAndUniformityProperty) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 120; ++trial) {
    const PureState psi = haar_random_state(2, rng);
    const PureState target = target_output(psi);
    const TeleportRun run = teleport_enumerate(psi, ideal_resource());
    double total = 0.0;
    for (const auto& b : run.branches) {
      total += b.probability;
      EXPECT_NEAR(b.probability, 0.25, 1e-12);
      EXPECT_NEAR(state_fidelity(b.output, target), 1.0, 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Teleport, WrongCorrectionIsDetected) {
  std::mt19937_64 rng(24);
  const CMatrix k = correction_for(1, Sign::minus).elements();
  for (int trial = 0; trial < 50; ++trial) {
    const PureState psi = haar_random_state(2, rng);
    const TeleportRun run = teleport_enumerate(psi, ideal_resource());
    const BranchOutcome& b = run.branches[3];
    ASSERT_EQ(b.m2, 1);
    ASSERT_EQ(b.m3, Sign::minus);
    // Undo the (1,-) correction, i.e. apply the (0,+) rule instead.
    const DensityMatrix wrong(k.adjoint() * b.output.elements() * k);
    EXPECT_LT(state_fidelity(wrong, target_output(psi)), 1.0 - 1e-6);
  }
}

TEST(Teleport, WernerResourceDegradesMonotonically) {
  std::mt19937_64 rng(25);
  std::vector<PureState> inputs;
  for (int i = 0; i < 40; ++i) inputs.push_back(haar_random_state(2, rng));
  double previous = 2.0;
  for (double v : {1.0, 0.9, 0.8, 0.5}) {
    double avg = 0.0;
    for (const auto& psi : inputs) {
      for (const auto& b : teleport_enumerate(psi, optics::spdc_source(v)).branches) {
        avg += b.probability * state_fidelity(b.output, target_output(psi));
      }
    }
    avg /= static_cast<double>(inputs.size());
    EXPECT_LE(avg, previous + 1e-12) << "v=" << v;
    previous = avg;
  }
  EXPECT_LT(previous, 0.9);
}

TEST(Teleport, SampleModeIsSeededAndCoversBranches) {
  const PureState psi = tomography::tomo_input_state("DR");
  const TeleportRun a = teleport_sample(psi, ideal_resource(), 42);
  const TeleportRun b = teleport_sample(psi, ideal_resource(), 42);
  ASSERT_EQ(a.branches.size(), 1u);
  EXPECT_EQ(a.branches[0].m2, b.branches[0].m2);
  EXPECT_EQ(a.branches[0].m3, b.branches[0].m3);
  std::set<std::pair<int, int>> seen;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const auto run = teleport_sample(psi, ideal_resource(), s);
    seen.emplace(run.branches[0].m2, static_cast<int>(run.branches[0].m3));
    EXPECT_NEAR(state_fidelity(run.branches[0].output, target_output(psi)), 1.0, 1e-12);
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Identity, BasisFeaturedAndRandomInputs) {
  EXPECT_LE(verify_identity(tomography::tomo_input_state("HH")).max_deviation, 1e-12);
  EXPECT_LE(verify_identity(tomography::tomo_input_state("RR")).max_deviation, 1e-12);
  std::mt19937_64 rng(26);
  for (int i = 0; i < 100; ++i) EXPECT_LE(verify_identity(haar_random_state(2, rng)).max_deviation, 1e-12);
}

TEST(Identity, DetectsAGlobalSignError) {
  const IdentityReport r = verify_identity(tomography::tomo_input_state("VV"));
  EXPECT_LE((r.lhs - r.rhs).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((r.lhs + r.rhs).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Communication, OneEbitTwoCbits) {
  const PureState psi = tomography::tomo_input_state("RD");
  const CommunicationCost e = communication_cost(teleport_enumerate(psi, ideal_resource()));
  EXPECT_EQ(e.ebits, 1);
  EXPECT_EQ(e.cbits, 2);
  const TeleportRun s = teleport_sample(psi, ideal_resource(), 7);
  const CommunicationCost c = communication_cost(s);
  EXPECT_EQ(c.ebits, 1);
  EXPECT_EQ(c.cbits, 2);
  ASSERT_EQ(s.messages.size(), 2u);
  EXPECT_EQ(s.messages[0].bit, s.branches[0].m2);
  EXPECT_NE(s.messages[0].from, s.messages[1].from);
  EXPECT_THROW(communication_cost(TeleportRun{}), InvalidArgument);
}
