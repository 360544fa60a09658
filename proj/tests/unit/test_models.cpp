#include "fpf/model.hpp"
#include "fpf/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace fpf;

namespace {

const ParamMap kLinear{{"alpha", -0.5}, {"gamma", 3.0}, {"sigma_b", 1.0}, {"sigma_w", 0.5}};
const ParamMap kDoubleWell{{"sigma_b", 0.4}, {"sigma_w", 0.2}};
const ParamMap kOscillator{{"omega", 1.0}, {"sigma_b", 0.5}, {"sigma_w", 0.4}};

}  // namespace

TEST(BuiltinModel, LinearDriftAndObservation) {
  const auto m = make_builtin_model("linear", kLinear);
  EXPECT_DOUBLE_EQ(m.drift(2.0), -1.0);
  EXPECT_DOUBLE_EQ(m.obs(2.0), 6.0);
  EXPECT_DOUBLE_EQ(m.init_mean(), 1.0);
  EXPECT_DOUBLE_EQ(m.init_var(), 1.0);
  EXPECT_EQ(m.geometry(), Geometry::line);
  ASSERT_TRUE(m.linear_params().has_value());
  EXPECT_DOUBLE_EQ(m.linear_params()->gamma, 3.0);
}

TEST(BuiltinModel, DoubleWellEquilibria) {
  const auto m = make_builtin_model("double_well", kDoubleWell);
  EXPECT_DOUBLE_EQ(m.drift(1.0), 0.0);
  EXPECT_DOUBLE_EQ(m.drift(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(m.drift(0.0), 0.0);
  EXPECT_GT(m.drift(0.5), 0.0);
  EXPECT_LT(m.drift(1.5), 0.0);
}

TEST(BuiltinModel, OscillatorObservation) {
  const auto m = make_builtin_model("oscillator", kOscillator);
  EXPECT_DOUBLE_EQ(m.obs(0.0), 1.0);
  EXPECT_NEAR(m.obs(std::numbers::pi), 0.0, 1e-15);
  EXPECT_EQ(m.geometry(), Geometry::circle);
  EXPECT_DOUBLE_EQ(m.drift(0.3), 1.0);
  EXPECT_DOUBLE_EQ(m.drift(4.0), 1.0);
}

TEST(BuiltinModel, OscillatorIsPeriodic) {
  const auto m = make_builtin_model("oscillator", kOscillator);
  for (int i = 0; i < 50; ++i) {
    const double x = -10.0 + 0.4 * i;
    EXPECT_LT(std::abs(m.drift(x) - m.drift(x + two_pi)), 1e-12);
    EXPECT_LT(std::abs(m.obs(x) - m.obs(x + two_pi)), 1e-12);
  }
}

TEST(BuiltinModel, DoubleWellDriftIsMinusPotentialGradient) {
  const auto m = make_builtin_model("double_well", kDoubleWell);
  auto potential = [](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; };
  const double h = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const double x = -2.0 + 4.0 * i / 19.0;
    const double fd = -(potential(x + h) - potential(x - h)) / (2.0 * h);
    EXPECT_NEAR(m.drift(x), fd, 1e-8) << "x=" << x;
  }
}

TEST(BuiltinModel, ObservationDerivativeMatchesFiniteDifference) {
  for (const auto& [name, params] :
       {std::pair{"linear", kLinear}, std::pair{"double_well", kDoubleWell},
        std::pair{"oscillator", kOscillator}}) {
    const auto m = make_builtin_model(name, params);
    const double h = 1e-5;
    for (int i = 0; i < 20; ++i) {
      const double x = -3.0 + 9.0 * i / 19.0;
      const double fd = (m.obs(x + h) - m.obs(x - h)) / (2.0 * h);
      EXPECT_NEAR(m.obs_deriv(x), fd, 1e-6) << name << " x=" << x;
    }
  }
}

TEST(BuiltinModel, RejectsBadInput) {
  EXPECT_THROW(make_builtin_model("nonsense", kLinear), std::invalid_argument);
  ParamMap missing = kLinear;
  missing.erase("gamma");
  EXPECT_THROW(make_builtin_model("linear", missing), std::invalid_argument);
  ParamMap zero_noise = kLinear;
  zero_noise["sigma_w"] = 0.0;
  EXPECT_THROW(make_builtin_model("linear", zero_noise), std::invalid_argument);
  ParamMap nan = kDoubleWell;
  nan["sigma_b"] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(make_builtin_model("double_well", nan), std::invalid_argument);
  ParamMap extra = kOscillator;
  extra["gamma"] = 1.0;
  EXPECT_THROW(make_builtin_model("oscillator", extra), std::invalid_argument);
}

TEST(LinearModelParams, NegativeSigmaWRejected) {
  LinearModelParams p;
  p.sigma_w = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(ScalarDiffusionModel::linear(p), std::invalid_argument);
}

TEST(MultiLinearModelParams, CovarianceChecks) {
  MultiLinearModelParams p;
  p.a_matrix = Eigen::Matrix2d::Zero();
  p.gamma = Eigen::Vector2d(1.0, 0.0);
  p.init_mean = Eigen::Vector2d::Zero();
  p.init_cov = Eigen::Matrix2d::Identity();
  EXPECT_NO_THROW(p.validate());

  p.init_cov(0, 1) = 0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);

  p.init_cov = Eigen::Matrix2d::Identity();
  p.init_cov(1, 1) = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(InitialLaw, MomentsOfBimodalPrior) {
  const auto law = InitialLaw::bimodal(0.0, 1.0, 0.1);
  EXPECT_DOUBLE_EQ(law.overall_mean(), 0.0);
  EXPECT_DOUBLE_EQ(law.overall_variance(), 1.1);
  RandomStream rs(3);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = law.sample(rs);
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.1, 0.01);
}

TEST(WrapAngle, MapsIntoHalfOpenInterval) {
  for (double x : {-7.0, -two_pi, -1e-18, 0.0, 3.0, two_pi, 13.0, 1e6}) {
    const double w = wrap_angle(x);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, two_pi);
  }
  EXPECT_DOUBLE_EQ(wrap_angle(two_pi + 1.0), 1.0);
}

TEST(RandomStream, SameKeySameSequence) {
  RandomStream a(42, 5);
  RandomStream b(42, 5);
  RandomStream c(42, 6);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differs |= x != c.normal();
  }
  EXPECT_TRUE(differs);
}

TEST(RandomStream, SubstreamIsPureFunctionOfKey) {
  RandomStream parent(9, 1);
  const auto s1 = parent.substream(3);
  parent.normal();
  const auto s2 = parent.substream(3);
  auto a = s1;
  auto b = s2;
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  EXPECT_NE(parent.substream(3).stream_id(), parent.substream(4).stream_id());
}
