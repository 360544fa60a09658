#include "fpf/baselines.hpp"
#include "fpf/errors.hpp"
#include "support/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace fpf;

namespace {

TruthPath zero_increments(double dt, std::size_t n) {
  TruthPath t;
  t.dt = dt;
  t.obs_increments.assign(n, 0.0);
  t.states.assign(n + 1, 0.0);
  for (std::size_t k = 0; k <= n; ++k) t.times.push_back(static_cast<double>(k) * dt);
  return t;
}

}  // namespace

TEST(KalmanBucy, PureVarianceGrowthWithoutObservation) {
  LinearModelParams p;
  p.alpha = 0.0;
  p.gamma = 0.0;
  p.sigma_b = 1.0;
  p.sigma_w = 1.0;
  p.init_var = 1.0;
  const auto states = kalman_bucy_run(p, zero_increments(0.01, 100));
  ASSERT_EQ(states.size(), 100u);
  EXPECT_NEAR(states.back().variance, 2.0, 1e-9);
  EXPECT_NEAR(states.back().time, 1.0, 1e-12);
}

TEST(KalmanBucy, ConvergesToRiccatiRoot) {
  const LinearModelParams p;
  const auto truth = simulate_truth(ScalarDiffusionModel::linear(p), 0.01, 5.0, RandomStream(1));
  const auto states = kalman_bucy_run(p, truth);
  EXPECT_NEAR(states.back().variance, 0.153364, 0.01 * 0.153364);
  EXPECT_NEAR(states.back().variance, fpf::testing::riccati_root(), 1e-9);
}

TEST(KalmanBucy, FixedPointIsStationary) {
  const LinearModelParams p;
  const double root = fpf::testing::riccati_root();
  const auto truth = simulate_truth(ScalarDiffusionModel::linear(p), 0.01, 20.0, RandomStream(2));
  const auto states = kalman_bucy_run(p, truth, 1.0, root);
  for (const auto& s : states) EXPECT_NEAR(s.variance, root, 1e-6);
}

TEST(KalmanBucy, VarianceIndependentOfObservations) {
  const LinearModelParams p;
  const auto m = ScalarDiffusionModel::linear(p);
  const auto a = kalman_bucy_run(p, simulate_truth(m, 0.01, 3.0, RandomStream(1)));
  const auto b = kalman_bucy_run(p, simulate_truth(m, 0.01, 3.0, RandomStream(2)));
  bool means_differ = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].variance, b[k].variance);
    means_differ |= a[k].mean != b[k].mean;
  }
  EXPECT_TRUE(means_differ);
}

TEST(KalmanBucy, LargeStepIsReported) {
  LinearModelParams p;
  p.init_var = 5.0;
  EXPECT_THROW(kalman_bucy_run(p, zero_increments(0.01, 10)), DivergenceError);
}

TEST(SystematicResample, Examples) {
  EXPECT_EQ(systematic_resample(std::vector<double>{0.75, 0.25}, 0.1, 4),
            (std::vector<std::size_t>{0, 0, 0, 1}));
  const std::vector<double> uniform(7, 1.0 / 7.0);
  for (double u : {0.0, 0.3, 0.999}) {
    EXPECT_EQ(systematic_resample(uniform, u), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
  }
  for (double u : {0.0, 0.5, 0.99}) {
    EXPECT_EQ(systematic_resample(std::vector<double>{1.0, 0.0}, u),
              (std::vector<std::size_t>{0, 0}));
  }
  EXPECT_THROW(systematic_resample(std::vector<double>{0.5, 0.4}, 0.1), std::invalid_argument);
  EXPECT_THROW(systematic_resample(std::vector<double>{0.5, 0.5}, 1.0), std::invalid_argument);
}

TEST(SystematicResample, CountBoundsOnRandomWeights) {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 60);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(size(gen)));
    for (auto& v : w) v = std::pow(unif(gen), 3.0);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total == 0.0) continue;
    for (auto& v : w) v /= total;
    const auto idx = systematic_resample(w, unif(gen));
    ASSERT_EQ(idx.size(), w.size());
    std::vector<std::size_t> count(w.size(), 0);
    for (auto i : idx) ++count[i];
    const double n = static_cast<double>(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      // Allow for rounding of the cumulative sum at the boundaries.
      EXPECT_GE(static_cast<double>(count[i]), std::floor(n * w[i] - 1e-9)) << trial;
      EXPECT_LE(static_cast<double>(count[i]), std::ceil(n * w[i] + 1e-9)) << trial;
    }
  }
}

TEST(BootstrapStep, FlatLikelihoodKeepsUniformWeights) {
  const ScalarDiffusionModel m("flat", [](double x) { return -x; }, [](double) { return 0.0; },
                               [](double) { return 0.0; }, 1.0, 1.0,
                               InitialLaw::gaussian(0.0, 1.0));
  auto e = WeightedEnsemble::uniform({-1.0, 0.0, 0.5, 2.0});
  RandomStream rs(1);
  bool resampled = true;
  const auto next = bootstrap_step(e, m, 0.3, 0.01, rs, 1.0, 0, &resampled);
  EXPECT_FALSE(resampled);
  for (double w : next.weights) EXPECT_EQ(w, 0.25);
  EXPECT_DOUBLE_EQ(next.ess, 4.0);
}

TEST(BootstrapStep, LikelihoodRatio) {
  const ScalarDiffusionModel m("id", [](double) { return 0.0; }, [](double x) { return x; },
                               [](double) { return 1.0; }, 0.0, 1.0,
                               InitialLaw::gaussian(0.0, 1.0));
  RandomStream rs(1);
  const auto next = bootstrap_step(WeightedEnsemble::uniform({0.0, 1.0}), m, 0.1, 0.1, rs, 0.1);
  EXPECT_NEAR(next.weights[1] / next.weights[0], std::exp(0.05), 1e-14);
  EXPECT_NEAR(next.weights[1] / next.weights[0], 1.05127, 1e-5);
  EXPECT_NEAR(next.weights[0] + next.weights[1], 1.0, 1e-15);
}

TEST(BootstrapStep, DegenerateWeightsResampleToOneParticle) {
  const ScalarDiffusionModel m("still", [](double) { return 0.0; }, [](double) { return 0.0; },
                               [](double) { return 0.0; }, 0.0, 1.0,
                               InitialLaw::gaussian(0.0, 1.0));
  WeightedEnsemble e;
  e.positions = {5.0, 6.0, 7.0, 8.0};
  e.weights = {1.0, 0.0, 0.0, 0.0};
  e.ess = 1.0;
  RandomStream rs(3);
  bool resampled = false;
  const auto next = bootstrap_step(e, m, 0.0, 0.01, rs, 1.0, 0, &resampled);
  EXPECT_TRUE(resampled);
  for (double x : next.positions) EXPECT_EQ(x, 5.0);
  for (double w : next.weights) EXPECT_EQ(w, 0.25);
}

TEST(BootstrapStep, NoiselessPropagationMatchesEulerFlow) {
  const ScalarDiffusionModel m("flow", [](double x) { return x * (1.0 - x * x); },
                               [](double x) { return x; }, [](double) { return 1.0; }, 0.0, 1e6,
                               InitialLaw::gaussian(0.0, 1.0));
  auto e = WeightedEnsemble::uniform({-1.5, -0.2, 0.4, 1.7});
  RandomStream rs(3);
  std::vector<double> x = e.positions;
  for (int k = 0; k < 20; ++k) {
    e = bootstrap_step(e, m, 0.01, 0.01, rs, 0.5);
    for (auto& v : x) v = v + v * (1.0 - v * v) * 0.01;
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(e.positions[i], x[i]);
  }
}

TEST(BootstrapStep, WeightsStayNormalized) {
  const auto m = make_builtin_model("double_well", ParamMap{{"sigma_b", 0.4}, {"sigma_w", 0.2}});
  RandomStream rs(9);
  std::vector<double> x(200);
  for (auto& v : x) v = rs.normal();
  auto e = WeightedEnsemble::uniform(x);
  const auto truth = simulate_truth(m, 0.01, 3.0, RandomStream(10));
  for (std::size_t k = 0; k < truth.steps(); ++k) {
    e = bootstrap_step(e, m, truth.obs_increments[k], 0.01, rs, 0.5, k);
    const double s = std::accumulate(e.weights.begin(), e.weights.end(), 0.0);
    ASSERT_NEAR(s, 1.0, 1e-9);
    ASSERT_GE(e.ess, 1.0 - 1e-9);
    ASSERT_LE(e.ess, 200.0 + 1e-9);
  }
}

TEST(BootstrapStep, UnderflowIsFilterCollapse) {
  const ScalarDiffusionModel m("id", [](double) { return 0.0; }, [](double x) { return x; },
                               [](double) { return 1.0; }, 0.0, 0.01,
                               InitialLaw::gaussian(0.0, 1.0));
  RandomStream rs(1);
  try {
    bootstrap_step(WeightedEnsemble::uniform({100.0, 101.0}), m, -100.0, 0.01, rs, 0.5, 42);
    FAIL() << "expected collapse";
  } catch (const FilterCollapseError& e) {
    EXPECT_EQ(e.step(), 42u);
  }
}

TEST(BootstrapRun, DeterministicAndResamples) {
  const auto m = ScalarDiffusionModel::linear({});
  const auto truth = simulate_truth(m, 0.01, 2.0, RandomStream(1));
  const auto a = run_bootstrap(m, truth, 200, RandomStream(2));
  const auto b = run_bootstrap(m, truth, 200, RandomStream(2));
  ASSERT_EQ(a.estimates.size(), truth.steps());
  EXPECT_GT(a.resamples, 0u);
  for (std::size_t k = 0; k < a.estimates.size(); ++k) {
    EXPECT_EQ(a.estimates[k].mean, b.estimates[k].mean);
  }
}

TEST(EffectiveSampleSize, Bounds) {
  EXPECT_DOUBLE_EQ(effective_sample_size(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 4.0);
  EXPECT_DOUBLE_EQ(effective_sample_size(std::vector<double>{1.0, 0.0}), 1.0);
}
