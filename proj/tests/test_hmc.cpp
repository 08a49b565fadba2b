#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "bpinn/errors.hpp"
#include "bpinn/hmc.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

// exp(-0.5 theta' P theta) with a fixed precision matrix.
class GaussianTarget final : public LogDensity {
 public:
  explicit GaussianTarget(Matrix precision) : p_(std::move(precision)) {}
  int dim() const override { return static_cast<int>(p_.rows()); }
  double log_density(const Vector& theta, Vector* grad) const override {
    const Vector pt = p_ * theta;
    if (grad) *grad = -pt;
    return -0.5 * theta.dot(pt);
  }

 private:
  Matrix p_;
};

// Zero density everywhere except through numerical failure.
class ThrowingTarget final : public LogDensity {
 public:
  int dim() const override { return 1; }
  double log_density(const Vector& theta, Vector* grad) const override {
    if (std::abs(theta[0]) > 1e-3) throw NumericalError("blow-up");
    if (grad) *grad = Vector::Zero(1);
    return 0.0;
  }
  Vector initial_state(Rng&) const override { return Vector::Zero(1); }
};

Vector v1(double x) { return Vector::Constant(1, x); }

TEST(Leapfrog, OneStepHandArithmetic) {
  auto grad = [](const Vector& t) { return Vector(t); };
  const auto [theta, r] = leapfrog(grad, v1(1.0), v1(0.0), 0.1, 1);
  EXPECT_NEAR(theta[0], 0.995, 1e-15);
  EXPECT_NEAR(r[0], -0.09975, 1e-15);
}

TEST(Leapfrog, FreeParticle) {
  auto grad = [](const Vector& t) { return Vector(Vector::Zero(t.size())); };
  Vector t0(2), r0(2);
  t0 << 0.3, -1.0;
  r0 << 2.0, 0.5;
  const auto [theta, r] = leapfrog(grad, t0, r0, 0.1, 7);
  EXPECT_TRUE(theta.isApprox(t0 + 0.7 * r0, 1e-14));
  EXPECT_EQ(r, r0);
}

TEST(Leapfrog, TimeReversible) {
  auto grad = [](const Vector& t) {
    Vector g(2);
    g << t[0] * t[0] * t[0] + 0.3 * t[1], 2.0 * t[1] + 0.3 * t[0];
    return g;
  };
  Vector t0(2), r0(2);
  t0 << 0.8, -0.4;
  r0 << -0.3, 1.1;
  const auto [t1, r1] = leapfrog(grad, t0, r0, 0.05, 40);
  const auto [t2, r2] = leapfrog(grad, t1, Vector(-r1), 0.05, 40);
  EXPECT_LT((t2 - t0).norm(), 1e-10);
  EXPECT_LT((r2 + r0).norm(), 1e-10);
}

// For U = theta^2 / 2 one step is the linear map
//   [[1 - h^2/2, h], [-h + h^3/4, 1 - h^2/2]]
// with determinant 1.
TEST(Leapfrog, PreservesVolumeOnQuadratic) {
  const double h = 0.37;
  auto grad = [](const Vector& t) { return Vector(t); };
  const auto [ta, ra] = leapfrog(grad, v1(1.0), v1(0.0), h, 1);
  const auto [tb, rb] = leapfrog(grad, v1(0.0), v1(1.0), h, 1);
  Eigen::Matrix2d jac;
  jac << ta[0], tb[0], ra[0], rb[0];
  Eigen::Matrix2d analytic;
  analytic << 1 - h * h / 2, h, -h + h * h * h / 4, 1 - h * h / 2;
  EXPECT_LT((jac - analytic).norm(), 1e-15);
  EXPECT_NEAR(jac.determinant(), 1.0, 1e-14);
  EXPECT_NEAR(analytic.determinant(), 1.0, 1e-14);
}

TEST(Leapfrog, NonFiniteGradientSignalsDivergence) {
  PotentialFn pot = [](const Vector& t, Vector& g) {
    g = Vector::Constant(1, t[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0);
    return 0.0;
  };
  LeapfrogState s{v1(0.0), v1(1.0), 0.0, v1(0.0), true};
  EXPECT_FALSE(leapfrog(pot, s, 0.2, 10).finite);
  auto grad = [](const Vector& t) {
    return Vector(Vector::Constant(1, t[0] > 0.5 ? std::numeric_limits<double>::infinity() : 0.0));
  };
  EXPECT_THROW(leapfrog(grad, v1(0.0), v1(1.0), 0.2, 10), NumericalError);
}

// Oscillator regression: 200 leapfrog steps of size 0.05 track cos/sin.
TEST(Leapfrog, DeterministicOscillatorFlow) {
  auto grad = [](const Vector& t) { return Vector(t); };
  const auto [t, r] = leapfrog(grad, v1(1.0), v1(0.0), 0.05, 200);
  EXPECT_NEAR(t[0], std::cos(10.0), 2e-3);
  EXPECT_NEAR(r[0], -std::sin(10.0), 2e-3);
  EXPECT_NEAR(0.5 * (t[0] * t[0] + r[0] * r[0]), 0.5, 1e-3);
}

TEST(StepSizeAdapter, FullAcceptanceGrows) {
  StepSizeAdapter a(0.1);
  a.update(true);
  a.update(true);
  EXPECT_EQ(a.step_size(), 0.1);  // window below the minimum fill
  EXPECT_NEAR(a.update(true), 0.11, 1e-15);
  EXPECT_EQ(a.window_size(), 0);
}

TEST(StepSizeAdapter, ModerateAcceptanceUnchanged) {
  StepSizeAdapter a(0.1);
  for (bool b : {true, false, true, true}) a.update(b);  // 0.67 then 0.75
  EXPECT_EQ(a.step_size(), 0.1);
  EXPECT_DOUBLE_EQ(a.window_acceptance(), 0.75);
  for (int i = 0; i < 96; ++i) a.update(i % 4 != 1);
  EXPECT_EQ(a.step_size(), 0.1);
  EXPECT_EQ(a.window_size(), 100);
  a.update(true);
  EXPECT_EQ(a.window_size(), 100);
}

TEST(StepSizeAdapter, ZeroAcceptanceDecaysGeometrically) {
  StepSizeAdapter a(0.1);
  double prev = a.step_size();
  int changes = 0;
  for (int i = 0; i < 3000; ++i) {
    const double s = a.update(false);
    if (s != prev) {
      EXPECT_NEAR(s, prev / 1.1, 1e-15 * prev);
      ++changes;
    }
    prev = s;
  }
  EXPECT_EQ(changes, 1000);
  EXPECT_GT(a.step_size(), 0.0);
}

TEST(Hmc, StandardNormalMoments) {
  GaussianTarget t(Matrix::Identity(1, 1));
  HmcConfig c;
  c.burn_in = 500;
  c.total_samples = 10500;
  c.keep_last = 10000;
  c.leapfrog_steps = 10;
  c.seed = 42;
  const HmcResult r = hmc_sample(t, c);
  ASSERT_EQ(r.samples.count(), 10000);
  const Vector x = r.samples.draws.row(0).transpose();
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / (x.size() - 1);
  EXPECT_LT(std::abs(mean), 0.05);
  EXPECT_GE(var, 0.90);
  EXPECT_LE(var, 1.10);
  EXPECT_EQ(r.samples.sampler, "hmc");
  EXPECT_TRUE(r.samples.warnings.empty());
}

TEST(Hmc, CorrelatedGaussianCovariance) {
  Matrix cov(2, 2);
  cov << 1.0, 0.9, 0.9, 1.0;
  GaussianTarget t(cov.inverse());
  HmcConfig c;
  c.burn_in = 500;
  c.total_samples = 10500;
  c.keep_last = 10000;
  c.leapfrog_steps = 20;
  c.seed = 7;
  const HmcResult r = hmc_sample(t, c);
  const Matrix& d = r.samples.draws;
  const Vector mean = d.rowwise().mean();
  const Matrix centred = d.colwise() - mean;
  const Matrix emp = centred * centred.transpose() / (d.cols() - 1);
  EXPECT_LT((emp - cov).cwiseAbs().maxCoeff(), 0.05) << emp;
}

// Leapfrog on U = theta^2 / 2 conserves p^2/2 + (1 - h^2/4) theta^2/2
// exactly, so dH = h^2/8 (theta1^2 - theta0^2) for every trajectory.
TEST(Hmc, QuadraticEnergyErrorBound) {
  const double h = 0.1;
  auto grad = [](const Vector& t) { return Vector(t); };
  Rng rng(8, RngStream::kMomentum);
  for (int k = 0; k < 200; ++k) {
    const double t0 = 0.8 * (2.0 * rng.uniform() - 1.0);
    const double r0 = rng.normal();
    const auto [t1, r1] = leapfrog(grad, v1(t0), v1(r0), h, 50);
    const double dh = 0.5 * (t1[0] * t1[0] + r1[0] * r1[0]) - 0.5 * (t0 * t0 + r0 * r0);
    EXPECT_NEAR(dh, h * h / 8.0 * (t1[0] * t1[0] - t0 * t0), 1e-13);
    if (t0 * t0 + r0 * r0 < 0.7) {
      EXPECT_LT(std::abs(dh), 1e-3);
    }
  }
  GaussianTarget t(Matrix::Identity(1, 1));
  HmcConfig c;
  c.step_size = h;
  c.leapfrog_steps = 50;
  c.burn_in = 0;
  c.total_samples = 500;
  c.keep_last = 500;
  c.adapt_step_size = false;
  c.seed = 3;
  const HmcResult r = hmc_sample(t, c);
  EXPECT_GT(r.diagnostics.acceptance_rate, 0.99);
  EXPECT_EQ(r.diagnostics.final_step_size, h);
}

TEST(Hmc, ReproducibleGivenSeed) {
  GaussianTarget t(Matrix::Identity(3, 3));
  HmcConfig c;
  c.burn_in = 50;
  c.total_samples = 200;
  c.keep_last = 100;
  c.seed = 11;
  const HmcResult a = hmc_sample(t, c);
  const HmcResult b = hmc_sample(t, c);
  EXPECT_EQ(a.samples.draws, b.samples.draws);
  EXPECT_EQ(a.diagnostics.final_step_size, b.diagnostics.final_step_size);
  c.seed = 12;
  EXPECT_NE(hmc_sample(t, c).samples.draws, a.samples.draws);
}

TEST(Hmc, KeepsTailAfterBurnIn) {
  GaussianTarget t(Matrix::Identity(1, 1));
  HmcConfig c;
  c.burn_in = 20;
  c.total_samples = 50;
  c.keep_last = 100;
  c.seed = 1;
  EXPECT_EQ(hmc_sample(t, c).samples.count(), 30);
}

TEST(Hmc, NumericalFailuresAreRejectedDivergences) {
  ThrowingTarget t;
  HmcConfig c;
  c.burn_in = 100;
  c.total_samples = 200;
  c.keep_last = 50;
  c.seed = 5;
  const HmcResult r = hmc_sample(t, c);
  EXPECT_GT(r.diagnostics.divergences, 0);
  EXPECT_TRUE((r.samples.draws.array().abs() <= 1e-3).all());
  ASSERT_FALSE(r.samples.warnings.empty());
  EXPECT_LT(r.diagnostics.final_step_size, 0.1);
}

TEST(Hmc, InvalidConfigThrows) {
  GaussianTarget t(Matrix::Identity(1, 1));
  HmcConfig c;
  c.total_samples = 10;
  c.burn_in = 10;
  EXPECT_THROW(hmc_sample(t, c), ConfigError);
  c.total_samples = 20;
  c.step_size = 0.0;
  EXPECT_THROW(hmc_sample(t, c), ConfigError);
  c.step_size = 0.1;
  EXPECT_THROW(hmc_sample(t, c, Vector::Zero(2)), DimensionError);
}

}  // namespace
}  // namespace bpinn
