#include <cmath>

#include <gtest/gtest.h>

#include "bpinn/adam.hpp"
#include "bpinn/errors.hpp"

namespace bpinn {
namespace {

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
  AdamState s(AdamConfig{}, 3);
  Vector p(3);
  p << 1.0, -2.0, 0.5;
  Vector g(3);
  g << 4.0, -0.01, 0.0;
  adam_step(s, p, g);
  EXPECT_NEAR(p[0], 1.0 - 1e-3 * 4.0 / (4.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], -2.0 + 1e-3 * 0.01 / (0.01 + 1e-8), 1e-15);
  EXPECT_EQ(p[2], 0.5);
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, ZeroGradientLeavesParametersAndCountsStep) {
  AdamState s(AdamConfig{}, 2);
  Vector p(2);
  p << 0.3, -0.7;
  const Vector before = p;
  adam_step(s, p, Vector::Zero(2));
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, ScalarFirstStepHandValue) {
  AdamState s(AdamConfig{}, 1);
  Vector p = Vector::Zero(1);
  adam_step(s, p, Vector::Constant(1, 5.0));
  EXPECT_NEAR(p[0], -1e-3 * 5.0 / (5.0 + 1e-8), 1e-18);
  EXPECT_NEAR(p[0], -1e-3, 1e-11);
}

TEST(Adam, TwoConstantGradientStepsMatchHandReference) {
  AdamState s(AdamConfig{}, 1);
  Vector p = Vector::Zero(1);
  adam_step(s, p, Vector::Constant(1, 5.0));
  adam_step(s, p, Vector::Constant(1, 5.0));
  // m = 0.1*5, then 0.09*5 + 0.1*5; v likewise with 0.001 and 25.
  double x = 0.0;
  const double m1 = 0.5, v1 = 0.025;
  x -= 1e-3 * (m1 / 0.1) / (std::sqrt(v1 / 0.001) + 1e-8);
  const double m2 = 0.9 * m1 + 0.5, v2 = 0.999 * v1 + 0.025;
  x -= 1e-3 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(p[0], x, 1e-12);
}

// Scalar re-implementation of the bias-corrected recursion.
TEST(Adam, MatchesScalarRecursion) {
  const AdamConfig cfg{0.05, 0.8, 0.99, 1e-6};
  AdamState s(cfg, 1);
  Vector p = Vector::Constant(1, 3.0);
  double x = 3.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 25; ++t) {
    const double g = 2.0 * x - std::sin(x);
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mh = m / (1 - std::pow(cfg.beta1, t));
    const double vh = v / (1 - std::pow(cfg.beta2, t));
    x -= cfg.lr * mh / (std::sqrt(vh) + cfg.epsilon);
    adam_step(s, p, Vector::Constant(1, 2.0 * p[0] - std::sin(p[0])));
    EXPECT_NEAR(p[0], x, 1e-13) << t;
  }
}

TEST(Adam, MinimisesAnisotropicQuadratic) {
  AdamState s(AdamConfig{0.01}, 2);
  Vector p(2);
  p << 3.0, -4.0;
  for (int t = 0; t < 5000; ++t) {
    Vector g(2);
    g << 100.0 * (p[0] - 1.0), 0.01 * (p[1] + 2.0);
    adam_step(s, p, g);
  }
  EXPECT_NEAR(p[0], 1.0, 1e-2);
  EXPECT_NEAR(p[1], -2.0, 1e-2);
}

TEST(Adam, MismatchedLengthsThrow) {
  AdamState s(AdamConfig{}, 3);
  Vector p = Vector::Ones(4);
  EXPECT_THROW(adam_step(s, p, Vector::Ones(4)), DimensionError);
  AdamState t(AdamConfig{}, 4);
  EXPECT_THROW(adam_step(t, p, Vector::Ones(3)), DimensionError);
}

}  // namespace
}  // namespace bpinn
