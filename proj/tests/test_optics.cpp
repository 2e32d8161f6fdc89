#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gatetele/optics.hpp"
#include "gatetele/protocol.hpp"
#include "gatetele/tomography.hpp"

using namespace gatetele;
using namespace gatetele::optics;

namespace {

constexpr double kPi = std::numbers::pi;
const double kS = 1.0 / std::numbers::sqrt2;

double overlap(const PureState& a, const PureState& b) { return state_fidelity(a, b); }

double total_probability(const DetectionProbabilities& p) {
  double t = 0.0;
  for (const auto& pair : p) {
    for (const auto& row : pair) t += row[0] + row[1];
  }
  return t;
}

}  // namespace

TEST(Jones, HalfWavePlateAt22p5MakesDiagonal) {
  const PureState out = apply(element_operator(Element::hwp(kPi / 8)), polarization_state('H'), {1});
  EXPECT_NEAR(std::abs(out[0] - Complex(kS)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out[1] - Complex(kS)), 0.0, 1e-15);
}

TEST(Jones, HalfWavePlateAt45SwapsHV) {
  const CMatrix m = element_operator(Element::hwp(kPi / 4)).elements();
  EXPECT_NEAR(std::abs(m(0, 1) - Complex(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m(1, 0) - Complex(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m(0, 0)), 0.0, 1e-15);
}

TEST(Jones, QuarterWavePlateAtZero) {
  const CMatrix m = element_operator(Element::qwp(0.0)).elements();
  EXPECT_NEAR(std::abs(m(0, 0) - Complex(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m(1, 1) - Complex(0.0, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m(0, 1)), 0.0, 1e-15);
}

TEST(Jones, PlatesAreUnitaryProperty) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> angle(-4.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    EXPECT_TRUE(element_operator(Element::hwp(angle(rng))).is_unitary());
    EXPECT_TRUE(element_operator(Element::qwp(angle(rng))).is_unitary());
  }
  EXPECT_THROW(element_operator(Element::hwp(std::nan(""))), InvalidArgument);
}

TEST(Jones, PbsAndBeamSplitter) {
  // H stays in path 0, V is routed to path 1.
  const PureState v0 = PureState::basis(2, 0b10);
  EXPECT_NEAR(overlap(apply(element_operator(Element::pbs()), v0, {1, 2}), PureState::basis(2, 0b11)), 1.0, 1e-15);
  const PureState h0 = PureState::basis(2, 0b00);
  EXPECT_NEAR(overlap(apply(element_operator(Element::pbs()), h0, {1, 2}), h0), 1.0, 1e-15);
  const PureState out = apply(element_operator(Element::bs_5050()), PureState::basis(1, 0), {1});
  EXPECT_NEAR(overlap(out, plus_state()), 1.0, 1e-15);
}

TEST(Jones, InArmsActsPerPath) {
  const Operator u = in_arms(gates::identity(), gates::pauli_x());
  EXPECT_NEAR(overlap(apply(u, PureState::basis(2, 0b00), {1, 2}), PureState::basis(2, 0b00)), 1.0, 1e-15);
  EXPECT_NEAR(overlap(apply(u, PureState::basis(2, 0b10), {1, 2}), PureState::basis(2, 0b11)), 1.0, 1e-15);
  EXPECT_THROW(in_arms(gates::cnot(), gates::identity()), DimensionError);
}

TEST(Preparation, StandardLabelsReproduceStates) {
  for (char c : {'H', 'V', 'D', 'A', 'R', 'L'}) {
    EXPECT_NEAR(overlap(prep_to_state(prep_for(c)), polarization_state(c)), 1.0, 1e-14) << c;
  }
  EXPECT_THROW(prep_for('X'), InvalidArgument);
}

TEST(Preparation, AnglesReduceModPi) {
  EXPECT_NEAR(reduce_angle(-kPi / 8), 7 * kPi / 8, 1e-15);
  EXPECT_NEAR(reduce_angle(3 * kPi), 0.0, 1e-12);
  const PrepSetting a(kPi / 8, kPi / 4);
  const PrepSetting b(kPi / 8 + 2 * kPi, kPi / 4 - kPi);
  EXPECT_NEAR(std::abs(a.hwp_angle - b.hwp_angle), 0.0, 1e-12);
  EXPECT_NEAR(overlap(prep_to_state(a), prep_to_state(b)), 1.0, 1e-12);
}

TEST(Detectors, NamesRoundTrip) {
  for (DetectorPair p : kDetectorPairs) EXPECT_EQ(detector_pair_from_string(to_string(p)), p);
  EXPECT_THROW(detector_pair_from_string("D1D2"), InvalidArgument);
  EXPECT_EQ(path2_of(DetectorPair::D2D3), 1);
  EXPECT_EQ(sign3_of(DetectorPair::D2D3), protocol::Sign::minus);
  EXPECT_EQ(path2_of(DetectorPair::D1D3), 0);
  EXPECT_EQ(sign3_of(DetectorPair::D2D4), protocol::Sign::plus);
}

TEST(Noise, SourceAndDephasing) {
  EXPECT_LE((spdc_source(1.0).elements() - protocol::ideal_resource().elements()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((spdc_source(0.0).elements() - CMatrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(spdc_source(1.1), InvalidArgument);

  const DensityMatrix plus = DensityMatrix::from_pure(plus_state());
  EXPECT_NEAR(mz_dephase(plus, 1, 1.0)(0, 1).real(), 0.5, 1e-15);
  EXPECT_NEAR(mz_dephase(plus, 1, 0.6)(0, 1).real(), 0.3, 1e-15);
  EXPECT_NEAR(mz_dephase(plus, 1, 0.0)(0, 1).real(), 0.0, 1e-15);
  EXPECT_NEAR(mz_dephase(plus, 1, 0.0)(0, 0).real(), 0.5, 1e-15);

  NoiseModel bad = NoiseModel::ideal();
  bad.mz_visibility_3 = -0.1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = NoiseModel::ideal();
  bad.mean_counts_per_setting = std::numeric_limits<double>::infinity();
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Pipeline, MatchesProtocolForAllInputsAndSettings) {
  const auto settings = tomography_settings();
  double worst = 0.0;
  for (const char* label : tomography::kTomoInputLabels) {
    const PureState input = tomography::tomo_input_state(label);
    const DensityMatrix rho = evolve(prep_for_input(label[0], label[1]), NoiseModel::ideal());
    const protocol::TeleportRun run = protocol::teleport_enumerate(input, protocol::ideal_resource());
    for (const auto& s : settings) {
      const auto probs = detection_probabilities(rho, s);
      const PureState analyzer = tensor(polarization_state(s.q1), polarization_state(s.q4));
      for (const auto& b : run.branches) {
        const DetectorPair pair = kDetectorPairs[static_cast<std::size_t>(2 * b.m2 + static_cast<int>(b.m3))];
        const double born = b.probability * state_fidelity(b.output, analyzer);
        worst = std::max(worst, std::abs(probs[static_cast<std::size_t>(pair)][0][0] - born));
      }
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Pipeline, DetectionProbabilitiesSumToOneProperty) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  const auto settings = tomography_settings();
  for (int trial = 0; trial < 20; ++trial) {
    const NoiseModel noise{unit(rng), unit(rng), unit(rng), 1e4, 0.2 * unit(rng)};
    const PrepSetting a(angle(rng), angle(rng));
    const PrepSetting b(angle(rng), angle(rng));
    const DensityMatrix rho = evolve({a, a, b, b}, noise);
    EXPECT_NEAR(rho.elements().trace().real(), 1.0, 1e-12);
    const auto& s = settings[static_cast<std::size_t>(trial) % settings.size()];
    EXPECT_NEAR(total_probability(detection_probabilities(rho, s)), 1.0, 1e-12);
  }
}

TEST(Pipeline, WhiteNoiseSpreadsEvenly) {
  const DensityMatrix rho = evolve(prep_for_input('R', 'R'), NoiseModel::fully_depolarizing());
  const auto probs = detection_probabilities(rho, {'D', 'R'});
  for (const auto& pair : probs) {
    for (const auto& row : pair) {
      EXPECT_NEAR(row[0], 1.0 / 16.0, 1e-14);
      EXPECT_NEAR(row[1], 1.0 / 16.0, 1e-14);
    }
  }
}

TEST(Pipeline, InterferometerVisibilityLowersOutputFidelity) {
  const PureState target = protocol::target_output(tomography::tomo_input_state("RR"));
  const auto settings = tomography_settings();
  double previous = 2.0;
  for (double v : {1.0, 0.95, 0.85, 0.6, 0.3}) {
    const auto rows = exact_run(prep_for_input('R', 'R'), {1.0, v, v, 1e4, 0.0}, settings);
    const double f = state_fidelity(tomography::state_tomo(tomography::weights_from_probabilities(rows)), target);
    EXPECT_LT(f, previous + 1e-12) << v;
    previous = f;
  }
  EXPECT_LT(previous, 0.8);
}

TEST(Sampling, SeededRunsRepeat) {
  const auto settings = tomography_settings();
  const PrepSettings prep = prep_for_input('D', 'R');
  const CoincidenceTable a = simulate_run(prep, NoiseModel::calibrated(), settings, 5);
  const CoincidenceTable b = simulate_run(prep, NoiseModel::calibrated(), settings, 5);
  const CoincidenceTable c = simulate_run(prep, NoiseModel::calibrated(), settings, 6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.rows.size(), 64u);
  EXPECT_EQ(a.for_pair(DetectorPair::D2D4).rows.size(), 16u);
}

TEST(Sampling, PoissonMeanWithinThreeStandardErrors) {
  const AnalyzerSetting s('H', 'R');
  const std::vector<AnalyzerSetting> one{s};
  const PrepSettings prep = prep_for_input('R', 'H');
  const NoiseModel noise{0.982, 0.85, 0.85, 400.0, 0.0};
  const double p = coincidence_probability(evolve(prep, noise), s, DetectorPair::D1D4);
  const double mean = p * noise.mean_counts_per_setting;
  ASSERT_GT(mean, 10.0);
  constexpr int kRepeats = 1000;
  double sum = 0.0;
  for (int i = 0; i < kRepeats; ++i) {
    sum += static_cast<double>(simulate_run(prep, noise, one, 1000 + i).for_pair(DetectorPair::D1D4).rows.at(0).count);
  }
  const double se = std::sqrt(mean / kRepeats);
  EXPECT_NEAR(sum / kRepeats, mean, 3.0 * se);
}

TEST(Sampling, ZeroMeanGivesZeroCounts) {
  NoiseModel noise = NoiseModel::ideal();
  noise.mean_counts_per_setting = 0.0;
  for (const auto& r : simulate_run(prep_for_input('H', 'H'), noise, tomography_settings(), 1).rows) {
    EXPECT_EQ(r.count, 0u);
  }
}

TEST(Tables, DuplicateRowsRejected) {
  CoincidenceTable t;
  t.rows.push_back({{'H', 'H'}, DetectorPair::D1D4, 3});
  t.rows.push_back({{'H', 'H'}, DetectorPair::D1D3, 3});
  EXPECT_NO_THROW(t.validate());
  t.rows.push_back({{'H', 'H'}, DetectorPair::D1D4, 4});
  EXPECT_THROW(t.validate(), InvalidArgument);
  EXPECT_THROW(AnalyzerSetting('H', 'Q'), InvalidArgument);
}
