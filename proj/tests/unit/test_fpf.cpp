#include "fpf/baselines.hpp"
#include "fpf/errors.hpp"
#include "fpf/filter.hpp"
#include "support/reference.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

using namespace fpf;

namespace {

ScalarDiffusionModel custom(ScalarDiffusionModel::Function a, ScalarDiffusionModel::Function h,
                            ScalarDiffusionModel::Function dh, double sigma_b, double sigma_w) {
  return ScalarDiffusionModel("test", std::move(a), std::move(h), std::move(dh), sigma_b,
                              sigma_w, InitialLaw::gaussian(0.0, 1.0));
}

ScalarDiffusionModel double_well() {
  return make_builtin_model("double_well", ParamMap{{"sigma_b", 0.4}, {"sigma_w", 0.2}});
}

ParticleEnsemble line_ensemble(std::vector<double> x) {
  ParticleEnsemble e;
  e.positions = std::move(x);
  return e;
}

}  // namespace

TEST(FpfStep, ZeroGainIsPureDrift) {
  LinearModelParams p;
  p.alpha = 1.0;
  p.gamma = 0.0;
  p.sigma_b = 0.0;
  p.sigma_w = 1.0;
  const auto m = ScalarDiffusionModel::linear(p);
  const std::vector<double> noise{0.3, -0.7};
  const auto next = fpf_step(line_ensemble({1.0, 2.0}), m, {}, 0.37, 0.1, noise);
  EXPECT_DOUBLE_EQ(next.positions[0], 1.1);
  EXPECT_DOUBLE_EQ(next.positions[1], 2.2);

  const auto flat = custom([](double x) { return x; }, [](double) { return 4.0; },
                           [](double) { return 0.0; }, 0.0, 1.0);
  FpfOptions dns;
  dns.gain_method = GainMethod::dns;
  const auto next_dns = fpf_step(line_ensemble({1.0, 2.0}), flat, dns, 0.37, 0.1, noise);
  EXPECT_DOUBLE_EQ(next_dns.positions[0], 1.1);
  EXPECT_DOUBLE_EQ(next_dns.positions[1], 2.2);
}

TEST(FpfStep, ThreeParticleLinearHandValues) {
  LinearModelParams p;
  p.alpha = 0.0;
  p.gamma = 1.0;
  p.sigma_b = 0.0;
  p.sigma_w = 1.0;
  const auto m = ScalarDiffusionModel::linear(p);
  const std::vector<double> noise(3, 0.0);
  StepTrace trace;
  const auto next = fpf_step(line_ensemble({0.0, 1.0, 2.0}), m, {}, 0.5, 0.1, noise, &trace);
  EXPECT_NEAR(next.positions[0], 0.45, 1e-15);
  EXPECT_NEAR(next.positions[1], 1.40, 1e-15);
  EXPECT_NEAR(next.positions[2], 2.35, 1e-15);
  EXPECT_DOUBLE_EQ(trace.h_hat, 1.0);
  EXPECT_DOUBLE_EQ(trace.gain.at_particles[0].k, 1.0);
  EXPECT_EQ(next.step, 1u);
  EXPECT_DOUBLE_EQ(next.time, 0.1);
}

TEST(FpfStep, InnovationMeanIdentity) {
  const auto m = double_well();
  RandomStream rs(12);
  std::vector<double> x(257);
  for (auto& v : x) v = 1.3 * rs.normal();
  FpfOptions opt;
  opt.gain_method = GainMethod::dns;
  StepTrace trace;
  const double dz = 0.0123;
  const double dt = 0.01;
  fpf_step(line_ensemble(x), m, opt, dz, dt, rs, &trace);

  double h_mean = 0.0;
  for (double v : x) h_mean += m.obs(v);
  h_mean /= static_cast<double>(x.size());
  EXPECT_EQ(trace.h_hat, h_mean);

  double i_mean = 0.0;
  for (double v : trace.innovations) i_mean += v;
  i_mean /= static_cast<double>(x.size());
  EXPECT_NEAR(i_mean, dz - trace.h_hat * dt, 1e-12);
}

TEST(FpfStep, ZeroGainReducesToEulerMaruyama) {
  const auto m = custom([](double x) { return std::sin(x) - 0.2 * x; },
                        [](double) { return -1.5; }, [](double) { return 0.0; }, 0.7, 0.3);
  RandomStream rs(4);
  std::vector<double> x(100);
  for (auto& v : x) v = 2.0 * rs.normal();
  std::vector<double> noise(x.size());
  rs.fill_normal(noise);
  FpfOptions opt;
  opt.gain_method = GainMethod::dns;
  const auto next = fpf_step(line_ensemble(x), m, opt, 0.05, 0.01, noise);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(next.positions[i], euler_maruyama_step(m, x[i], 0.01, std::sqrt(0.01), noise[i]));
  }
}

TEST(FpfStep, ExchangeableWithNoise) {
  const auto m = double_well();
  RandomStream rs(99);
  std::vector<double> x(300);
  std::vector<double> noise(300);
  for (auto& v : x) v = rs.normal();
  rs.fill_normal(noise);
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  std::vector<double> px(x.size());
  std::vector<double> pn(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    px[i] = x[perm[i]];
    pn[i] = noise[perm[i]];
  }
  FpfOptions opt;
  opt.gain_method = GainMethod::dns;
  const auto a = fpf_step(line_ensemble(x), m, opt, 0.02, 0.01, noise);
  const auto b = fpf_step(line_ensemble(px), m, opt, 0.02, 0.01, pn);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(a.positions[perm[i]], b.positions[i], 1e-12);
  }
}

TEST(FpfStep, Deterministic) {
  const auto m = double_well();
  FpfOptions opt;
  opt.gain_method = GainMethod::dns;
  RandomStream init(3);
  const auto e = initial_ensemble(m, 500, init);
  RandomStream s1(8);
  RandomStream s2(8);
  const auto a = fpf_step(e, m, opt, 0.01, 0.01, s1);
  const auto b = fpf_step(e, m, opt, 0.01, 0.01, s2);
  EXPECT_EQ(a.positions, b.positions);
}

TEST(FpfStep, ItoFormAddsWongZakaiDrift) {
  const auto m = double_well();
  RandomStream rs(5);
  std::vector<double> x(400);
  for (auto& v : x) v = rs.normal();
  std::vector<double> noise(x.size(), 0.0);
  FpfOptions strat;
  strat.gain_method = GainMethod::dns;
  FpfOptions ito = strat;
  ito.form = FpfForm::ito;
  StepTrace trace;
  const auto a = fpf_step(line_ensemble(x), m, strat, 0.01, 0.01, noise, &trace);
  const auto b = fpf_step(line_ensemble(x), m, ito, 0.01, 0.01, noise);
  const double half_var = 0.5 * 0.2 * 0.2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& g = trace.gain.at_particles[i];
    EXPECT_NEAR(b.positions[i] - a.positions[i], half_var * g.k * g.k_prime * 0.01, 1e-12);
  }
}

TEST(FpfStep, CircleWrapsAndRejectsMismatch) {
  const auto osc = make_builtin_model(
      "oscillator", ParamMap{{"omega", 1.0}, {"sigma_b", 0.5}, {"sigma_w", 0.4}});
  RandomStream rs(2);
  auto e = initial_ensemble(osc, 1000, rs);
  EXPECT_EQ(e.geometry, Geometry::circle);
  FpfOptions opt;
  opt.gain_method = GainMethod::fourier_circle;
  for (int k = 0; k < 50; ++k) {
    e = fpf_step(e, osc, opt, 0.005, 0.01, rs);
    for (double th : e.positions) {
      ASSERT_GE(th, 0.0);
      ASSERT_LT(th, two_pi);
    }
  }
  FpfOptions linear_gain;
  EXPECT_THROW(fpf_step(e, osc, linear_gain, 0.0, 0.01, rs), std::invalid_argument);

  const auto dw = double_well();
  EXPECT_THROW(fpf_step(line_ensemble({0.0, 1.0}), dw, opt, 0.0, 0.01, rs),
               std::invalid_argument);
  EXPECT_THROW(fpf_step(line_ensemble({0.0, 1.0}), dw, linear_gain, 0.0, 0.01, rs),
               std::invalid_argument);
}

TEST(FpfStep, DivergenceNamesStepAndParticle) {
  LinearModelParams p;
  p.alpha = 0.0;
  p.gamma = 1.0;
  p.sigma_b = 0.0;
  const auto m = ScalarDiffusionModel::linear(p);
  auto e = line_ensemble({0.0, 1.0, 1e300});
  e.step = 17;
  const std::vector<double> noise(3, 0.0);
  try {
    fpf_step(e, m, {}, 1.0, 0.1, noise);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& err) {
    EXPECT_EQ(err.step(), 17u);
    ASSERT_TRUE(err.particle().has_value());
  }
}

TEST(Estimate, LineStatistics) {
  const auto m = ScalarDiffusionModel::linear({});
  const auto est = estimate(line_ensemble({1.0, 2.0, 3.0}), m);
  EXPECT_DOUBLE_EQ(est.mean, 2.0);
  EXPECT_DOUBLE_EQ(est.variance, 1.0);
  EXPECT_DOUBLE_EQ(est.h_hat, 6.0);
  EXPECT_THROW(estimate(line_ensemble({1.0}), m), std::invalid_argument);
}

TEST(Estimate, AntipodalPairIsDegenerate) {
  const auto osc = make_builtin_model(
      "oscillator", ParamMap{{"omega", 1.0}, {"sigma_b", 0.5}, {"sigma_w", 0.4}});
  ParticleEnsemble e;
  e.geometry = Geometry::circle;
  e.positions = {0.0, std::numbers::pi};
  const auto est = estimate(e, osc);
  EXPECT_TRUE(est.degenerate);
  EXPECT_EQ(est.mean, 0.0);
  EXPECT_DOUBLE_EQ(est.variance, 1.0);
  const auto c = fourier_coefficients(e.positions);
  EXPECT_LT(std::abs(c.p_c), 1e-12);
}

TEST(Estimate, CircularMeanAndDispersion) {
  const auto osc = make_builtin_model(
      "oscillator", ParamMap{{"omega", 1.0}, {"sigma_b", 0.5}, {"sigma_w", 0.4}});
  ParticleEnsemble e;
  e.geometry = Geometry::circle;
  e.positions = {6.2, 0.1, 0.05, 6.25};
  const auto est = estimate(e, osc);
  EXPECT_FALSE(est.degenerate);
  EXPECT_LT(std::min(est.mean, two_pi - est.mean), 0.1);
  EXPECT_GE(est.variance, 0.0);
  EXPECT_LT(est.variance, 0.01);

  e.positions.assign(4, 1.0);
  EXPECT_NEAR(estimate(e, osc).variance, 0.0, 1e-15);
  EXPECT_NEAR(estimate(e, osc).mean, 1.0, 1e-15);
}

TEST(Estimate, HHatWithinClt) {
  const auto m = ScalarDiffusionModel::linear({});
  RandomStream rs(31);
  const auto e = initial_ensemble(m, 10000, rs);
  const auto est = estimate(e, m);
  EXPECT_NEAR(est.h_hat, 3.0, 3.0 * 3.0 / 100.0);
}

TEST(RunFpf, LinearVarianceReachesRiccatiSteadyState) {
  const auto m = ScalarDiffusionModel::linear({});
  const auto truth = simulate_truth(m, 0.01, 50.0, RandomStream(7, streams::truth));
  const auto run = run_fpf(m, {}, truth, 10000, RandomStream(7, streams::fpf));
  ASSERT_EQ(run.estimates.size(), truth.steps());
  EXPECT_NEAR(run.estimates.back().variance, 0.153364, 0.2 * 0.153364);
  EXPECT_DOUBLE_EQ(run.estimates.back().time, 50.0);
}

TEST(RunFpf, EmptyTruthRejected) {
  const auto m = ScalarDiffusionModel::linear({});
  TruthPath empty;
  empty.dt = 0.01;
  empty.times = {0.0};
  empty.states = {1.0};
  EXPECT_THROW(run_fpf(m, {}, empty, 100, RandomStream(1)), std::invalid_argument);
}

TEST(RunFpf, Deterministic) {
  const auto m = double_well();
  const auto truth = simulate_truth(m, 0.01, 1.0, RandomStream(1));
  FpfOptions opt;
  opt.gain_method = GainMethod::dns;
  const auto a = run_fpf(m, opt, truth, 300, RandomStream(2));
  const auto b = run_fpf(m, opt, truth, 300, RandomStream(2));
  ASSERT_EQ(a.estimates.size(), b.estimates.size());
  for (std::size_t k = 0; k < a.estimates.size(); ++k) {
    EXPECT_EQ(a.estimates[k].mean, b.estimates[k].mean);
    EXPECT_EQ(a.estimates[k].variance, b.estimates[k].variance);
  }
}

TEST(EstimatesCsv, Layout) {
  std::vector<FilterEstimate> e(1);
  e[0].time = 0.01;
  e[0].mean = 1.5;
  e[0].variance = 0.25;
  e[0].h_hat = 4.5;
  std::ostringstream out;
  write_estimates_csv(e, out);
  EXPECT_EQ(out.str(), "t,mean,variance,h_hat\n0.01,1.5,0.25,4.5\n");
}
