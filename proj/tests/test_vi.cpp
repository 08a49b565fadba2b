#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"
#include "bpinn/vi.hpp"

namespace bpinn {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Independent diagonal Gaussian log-density.
class DiagGaussian final : public LogDensity {
 public:
  DiagGaussian(Vector mean, Vector sd) : mean_(std::move(mean)), sd_(std::move(sd)) {}
  int dim() const override { return static_cast<int>(mean_.size()); }
  double log_density(const Vector& theta, Vector* grad) const override {
    const Vector z = (theta - mean_).cwiseQuotient(sd_);
    if (grad) *grad = -z.cwiseQuotient(sd_);
    return -0.5 * z.squaredNorm() - sd_.array().log().sum() - 0.5 * dim() * kLog2Pi;
  }

 private:
  Vector mean_, sd_;
};

// Prior N(0, 1) and one observation y = 1 with unit noise.
class Conjugate final : public LogDensity {
 public:
  int dim() const override { return 1; }
  double log_density(const Vector& theta, Vector* grad) const override {
    const double t = theta[0];
    if (grad) *grad = Vector::Constant(1, -t + (1.0 - t));
    return -0.5 * t * t - 0.5 * (1.0 - t) * (1.0 - t) - kLog2Pi;
  }
};

class AlwaysNaN final : public LogDensity {
 public:
  int dim() const override { return 2; }
  double log_density(const Vector&, Vector*) const override {
    throw NumericalError("nan");
  }
};

double softplus_oracle(double r) { return std::log(1.0 + std::exp(r)); }

TEST(ViParams, ImpliedStd) {
  const ViParams p(Vector::Zero(3), Vector::Zero(3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p.stddev()[i], 0.693147, 1e-6);
  Vector rho(4);
  rho << -30.0, -2.0, 1.5, 40.0;
  const ViParams q(Vector::Zero(4), rho);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(q.stddev()[i], softplus_oracle(rho[i]), 1e-15);
  EXPECT_NEAR(q.stddev()[3], 40.0, 1e-12);
  EXPECT_GT(q.stddev()[0], 0.0);
  EXPECT_THROW(ViParams(Vector::Zero(2), Vector::Zero(3)), DimensionError);
}

TEST(ViFit, RecoversConjugatePosterior) {
  Conjugate t;
  ViConfig c;
  c.steps = 20000;
  c.seed = 1;
  const auto start = std::chrono::steady_clock::now();
  const ViResult r = vi_fit(t, ViParams(Vector::Zero(1), Vector::Zero(1)), c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_NEAR(r.params.mu[0], 0.5, 0.05);
  EXPECT_NEAR(r.params.stddev()[0] * r.params.stddev()[0], 0.5, 0.1);
  EXPECT_LT(secs, 30.0);
  EXPECT_EQ(r.objective_trace.size(), 200u);
}

TEST(ViFit, SelfTargetHasZeroObjectiveAndSmallDrift) {
  Vector mu(3), rho(3);
  mu << 0.3, -1.0, 2.0;
  rho << 0.0, 0.5, -1.0;
  const ViParams init(mu, rho);
  DiagGaussian t(mu, init.stddev());
  Rng rng(2, RngStream::kVariational);
  EXPECT_NEAR(vi_objective(t, init, 5, rng), 0.0, 1e-12);
  // The exact gradient of the sampled objective vanishes only in
  // expectation, so Adam random-walks at a scale of about lr * sqrt(steps).
  ViConfig c;
  c.steps = 1000;
  c.seed = 2;
  c.adam.lr = 1e-4;
  const ViResult slow = vi_fit(t, init, c);
  EXPECT_LT((slow.params.mu - mu).cwiseAbs().maxCoeff(), 0.01);
  EXPECT_LT((slow.params.rho - rho).cwiseAbs().maxCoeff(), 0.01);
  c.adam.lr = 1e-3;
  const ViResult fast = vi_fit(t, init, c);
  const double walk = 1e-3 * std::sqrt(1000.0);
  EXPECT_LT((fast.params.mu - mu).cwiseAbs().maxCoeff(), 3.0 * walk);
  EXPECT_LT((fast.params.rho - rho).cwiseAbs().maxCoeff(), 3.0 * walk);
}

// Objective gradient of the reparameterised estimator against finite
// differences of the same estimator with frozen noise.
TEST(ViFit, FirstStepFollowsReparameterisedGradient) {
  Vector mean(2), sd(2);
  mean << 1.0, -0.5;
  sd << 0.7, 1.8;
  DiagGaussian t(mean, sd);
  Vector mu(2), rho(2);
  mu << 0.2, 0.4;
  rho << -0.3, 0.8;
  auto objective = [&](const Vector& m, const Vector& r) {
    Rng rng(9, RngStream::kVariational);
    return vi_objective(t, ViParams(m, r), 5, rng);
  };
  Vector g(4);
  for (int i = 0; i < 2; ++i) {
    const double h = 1e-6;
    Vector mp = mu, mm = mu, rp = rho, rm = rho;
    mp[i] += h;
    mm[i] -= h;
    rp[i] += h;
    rm[i] -= h;
    g[i] = (objective(mp, rho) - objective(mm, rho)) / (2 * h);
    g[2 + i] = (objective(mu, rp) - objective(mu, rm)) / (2 * h);
  }
  // One Adam step from a fresh state moves each coordinate by lr * sign(g).
  ViConfig c;
  c.steps = 1;
  c.seed = 9;
  const ViResult r = vi_fit(t, ViParams(mu, rho), c);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(r.params.mu[i] - mu[i], -1e-3 * (g[i] > 0 ? 1 : -1), 1e-9);
    EXPECT_NEAR(r.params.rho[i] - rho[i], -1e-3 * (g[2 + i] > 0 ? 1 : -1), 1e-9);
  }
}

TEST(ViFit, PermutationSymmetricTargetGivesPermutedFit) {
  DiagGaussian t(Vector::Constant(3, 0.4), Vector::Constant(3, 0.6));
  Vector mu(3), rho(3);
  mu << 0.0, 1.0, -1.0;
  rho << 0.0, -1.0, 0.5;
  ViConfig c;
  c.steps = 5000;
  c.seed = 4;
  const ViResult a = vi_fit(t, ViParams(mu, rho), c);
  Vector mu_p(3), rho_p(3);
  mu_p << mu[2], mu[0], mu[1];
  rho_p << rho[2], rho[0], rho[1];
  const ViResult b = vi_fit(t, ViParams(mu_p, rho_p), c);
  std::vector<double> ma(a.params.mu.data(), a.params.mu.data() + 3);
  std::vector<double> mb(b.params.mu.data(), b.params.mu.data() + 3);
  std::sort(ma.begin(), ma.end());
  std::sort(mb.begin(), mb.end());
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ma[i], mb[i], 0.05);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(a.params.mu[i], 0.4, 0.05);
    EXPECT_NEAR(b.params.stddev()[i], 0.6, 0.05);
  }
}

TEST(ViFit, DeterministicGivenSeed) {
  Conjugate t;
  ViConfig c;
  c.steps = 300;
  c.seed = 6;
  const ViParams init(Vector::Zero(1), Vector::Zero(1));
  const ViResult a = vi_fit(t, init, c);
  const ViResult b = vi_fit(t, init, c);
  EXPECT_EQ(a.params.mu, b.params.mu);
  EXPECT_EQ(a.params.rho, b.params.rho);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(ViFit, PersistentNonFiniteObjectiveThrows) {
  AlwaysNaN t;
  ViConfig c;
  c.steps = 500;
  EXPECT_THROW(vi_fit(t, ViParams(Vector::Zero(2), Vector::Zero(2)), c), NumericalError);
  c.steps = 99;
  EXPECT_NO_THROW(vi_fit(t, ViParams(Vector::Zero(2), Vector::Zero(2)), c));
}

TEST(ViFit, DimensionMismatchThrows) {
  Conjugate t;
  EXPECT_THROW(vi_fit(t, ViParams(Vector::Zero(2), Vector::Zero(2)), ViConfig{}), DimensionError);
}

TEST(ViSample, VanishingStdCollapsesToMean) {
  Vector mu(2);
  mu << 1.5, -2.0;
  const PosteriorSamples s = vi_sample(ViParams(mu, Vector::Constant(2, -40.0)), 50, 1);
  EXPECT_LT((s.draws.colwise() - mu).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(s.sampler, "vi");
}

TEST(ViSample, MomentsWithinThreeStandardErrors) {
  Vector mu(3), rho(3);
  mu << 0.5, -1.0, 3.0;
  rho << -1.0, 0.0, 2.0;
  const ViParams p(mu, rho);
  const int m = 10000;
  const PosteriorSamples s = vi_sample(p, m, 17);
  const Vector sd = p.stddev();
  for (int i = 0; i < 3; ++i) {
    const Vector x = s.draws.row(i).transpose();
    const double mean = x.mean();
    const double var = (x.array() - mean).square().sum() / (m - 1);
    const double v = sd[i] * sd[i];
    EXPECT_LT(std::abs(mean - mu[i]), 3.0 * sd[i] / std::sqrt(m)) << i;
    EXPECT_LT(std::abs(var - v), 3.0 * v * std::sqrt(2.0 / (m - 1))) << i;
  }
}

TEST(ViSample, FixedSeedIsReproducible) {
  const ViParams p(Vector::Zero(4), Vector::Zero(4));
  EXPECT_EQ(vi_sample(p, 100, 3).draws, vi_sample(p, 100, 3).draws);
  EXPECT_NE(vi_sample(p, 100, 3).draws, vi_sample(p, 100, 4).draws);
  EXPECT_THROW(vi_sample(p, 0, 3), ConfigError);
}

}  // namespace
}  // namespace bpinn
