#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "bpinn/errors.hpp"
#include "bpinn/flow.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

class Normal final : public LogDensity {
 public:
  Normal(int dim, double mean, double sd) : dim_(dim), mean_(mean), sd_(sd) {}
  int dim() const override { return dim_; }
  double log_density(const Vector& theta, Vector* grad) const override {
    const Vector z = (theta.array() - mean_) / sd_;
    if (grad) *grad = -z / sd_;
    return -0.5 * z.squaredNorm() - dim_ * (std::log(sd_) + 0.5 * kLog2Pi);
  }

 private:
  int dim_;
  double mean_, sd_;
};

FlowConfig small_config(int steps) {
  FlowConfig c;
  c.euler_steps = steps;
  c.hidden_widths = {8, 8};
  return c;
}

TEST(FlowForward, ZeroPotentialIsIdentity) {
  PotentialField zero = [](const Vector& u, double, Vector& g, double& lap) {
    g = Vector::Zero(u.size());
    lap = 0.0;
  };
  Vector z(2);
  z << 0.4, -1.3;
  const FlowPoint p = flow_forward(zero, FlowConfig{}, z);
  EXPECT_EQ(p.sample, z);
  EXPECT_NEAR(p.log_density, -0.5 * z.squaredNorm() - kLog2Pi, 1e-15);
}

TEST(FlowForward, LinearPotentialTranslates) {
  const double a = 0.7;
  PotentialField lin = [a](const Vector& u, double, Vector& g, double& lap) {
    g = Vector::Constant(u.size(), a);
    lap = 0.0;
  };
  const Vector z = Vector::Constant(1, -0.2);
  const FlowPoint p = flow_forward(lin, FlowConfig{}, z, -1.25);
  EXPECT_NEAR(p.sample[0], -0.2 + a * 1.0, 1e-14);
  EXPECT_EQ(p.log_density, -1.25);
}

TEST(FlowForward, QuadraticPotentialLowersDensityByTimeSpan) {
  PotentialField quad = [](const Vector& u, double, Vector& g, double& lap) {
    g = u;
    lap = static_cast<double>(u.size());
  };
  FlowConfig c;
  c.time_span = 1.0;
  c.euler_steps = 50;
  const FlowPoint p = flow_forward(quad, c, Vector::Constant(1, 0.3), 0.0);
  EXPECT_NEAR(p.log_density, -1.0, 1e-13);
  EXPECT_NEAR(p.sample[0], 0.3 * std::pow(1.0 + 0.02, 50), 1e-13);
}

// Euler log-density recursion against the exact change of variables for
// u -> u (1 + c dt): log|det| = n log(1 + c dt), first order in dt.
TEST(FlowForward, LogDensityConvergesToChangeOfVariables) {
  const double c = 0.8;
  PotentialField quad = [c](const Vector& u, double, Vector& g, double& lap) {
    g = c * u;
    lap = c;
  };
  double prev_err = 1e9;
  for (int n : {10, 100, 1000}) {
    FlowConfig cfg;
    cfg.euler_steps = n;
    const FlowPoint p = flow_forward(quad, cfg, Vector::Constant(1, 0.5), 0.0);
    const double exact = -n * std::log1p(c / n);
    const double err = std::abs(p.log_density - exact);
    EXPECT_LT(err, prev_err / 5.0);
    EXPECT_LT(err, c * c / (2.0 * n) * 1.01);
    prev_err = err;
  }
}

TEST(FlowForward, NonFiniteTrajectoryReportsStep) {
  PotentialField blow = [](const Vector& u, double t, Vector& g, double& lap) {
    g = Vector::Constant(u.size(), t > 0.25 ? std::numeric_limits<double>::infinity() : 1.0);
    lap = 0.0;
  };
  FlowConfig c;
  c.euler_steps = 10;
  try {
    flow_forward(blow, c, Vector::Zero(1));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.index(), 4);  // t_{i-1} = 0.3 first exceeds 0.25 at i = 4
  }
}

TEST(FlowForward, InvalidConfigThrows) {
  FlowConfig c;
  c.euler_steps = 0;
  PotentialField zero = [](const Vector& u, double, Vector& g, double& lap) {
    g = Vector::Zero(u.size());
    lap = 0.0;
  };
  EXPECT_THROW(flow_forward(zero, c, Vector::Zero(1)), ConfigError);
  c.euler_steps = 5;
  c.time_span = 0.0;
  EXPECT_THROW(flow_forward(zero, c, Vector::Zero(1)), ConfigError);
}

TEST(FlowMlp, ArchitectureAndIdentityInit) {
  const MlpArchitecture arch = flow_architecture(20, {128, 128, 128});
  EXPECT_EQ(arch.input_dim, 21);
  const Vector p = flow_init(arch, 3);
  Rng rng(1, RngStream::kFlow);
  Matrix z(20, 4);
  for (int j = 0; j < 4; ++j) rng.fill_normal(z.col(j));
  FlowConfig c;
  c.euler_steps = 10;
  const FlowBatch b = flow_forward(arch, p, c, z);
  EXPECT_EQ(b.samples, z);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(b.log_density[j], -0.5 * z.col(j).squaredNorm() - 10 * kLog2Pi, 1e-12);
}

// The batched MLP flow against the point-wise recursion driven by mlp_jet.
TEST(FlowMlp, BatchedFlowMatchesPointwiseRecursion) {
  const MlpArchitecture arch = flow_architecture(2, {8, 8});
  Rng rng(4, RngStream::kInit);
  const Vector params = 0.5 * rng.normal_vector(arch.param_count());
  PotentialField phi = [&](const Vector& u, double t, Vector& g, double& lap) {
    Vector in(3);
    in << u, t;
    const Jet j = mlp_jet(arch, params, in);
    g = j.grad.head(2);
    lap = j.hess_diag.head(2).sum();
  };
  const FlowConfig c = small_config(7);
  Matrix z(2, 3);
  for (int j = 0; j < 3; ++j) rng.fill_normal(z.col(j));
  const FlowBatch b = flow_forward(arch, params, c, z);
  for (int j = 0; j < 3; ++j) {
    const FlowPoint p = flow_forward(phi, c, Vector(z.col(j)));
    EXPECT_LT((b.samples.col(j) - p.sample).norm(), 1e-12);
    EXPECT_NEAR(b.log_density[j], p.log_density, 1e-12);
  }
}

TEST(FlowObjective, GradientMatchesFiniteDifferences) {
  const Normal target(2, 0.5, 0.8);
  const MlpArchitecture arch = flow_architecture(2, {6, 5});
  Rng rng(8, RngStream::kInit);
  const Vector params = 0.4 * rng.normal_vector(arch.param_count());
  const FlowConfig c = small_config(4);
  Matrix z(2, 3);
  for (int j = 0; j < 3; ++j) rng.fill_normal(z.col(j));
  Vector g;
  flow_objective(target, arch, params, c, z, &g);
  ASSERT_EQ(g.size(), params.size());
  const double scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double h = 1e-6;
    Vector pp = params, pm = params;
    pp[i] += h;
    pm[i] -= h;
    const double fd = (flow_objective(target, arch, pp, c, z, nullptr) -
                       flow_objective(target, arch, pm, c, z, nullptr)) / (2 * h);
    EXPECT_NEAR(g[i], fd, 1e-6 * scale) << "param " << i;
  }
}

TEST(FlowObjective, IdentityOnMatchingTargetIsZero) {
  const Normal target(3, 0.0, 1.0);
  const MlpArchitecture arch = flow_architecture(3, {8});
  const Vector params = flow_init(arch, 2);
  Rng rng(2, RngStream::kFlow);
  Matrix z(3, 16);
  for (int j = 0; j < 16; ++j) rng.fill_normal(z.col(j));
  EXPECT_NEAR(flow_objective(target, arch, params, small_config(5), z, nullptr), 0.0, 1e-12);
}

TEST(FlowFit, StandardNormalTargetStaysNearZeroKl) {
  const Normal target(1, 0.0, 1.0);
  FlowConfig c;
  c.train_steps = 300;
  c.seed = 5;
  const FlowResult r = flow_fit(target, c);
  EXPECT_LT(flow_kl_estimate(target, r, c, 2000, 9), 0.05);
  EXPECT_EQ(r.kl_trace.size(), 3u);
}

TEST(FlowFit, ShiftsStandardNormalToMeanTwo) {
  const Normal target(1, 2.0, 1.0);
  FlowConfig c;
  // 50 Euler steps keep the first-order log-density recursion accurate;
  // coarse steps with a large rate let Adam exploit its error (KL < 0).
  c.hidden_widths = {32, 32};
  c.euler_steps = 50;
  c.train_steps = 4000;
  c.adam.lr = 3e-4;
  c.seed = 6;
  const FlowResult r = flow_fit(target, c);
  const PosteriorSamples s = flow_sample(r, c, 4000, 10);
  EXPECT_NEAR(s.draws.row(0).mean(), 2.0, 0.1);
  const double kl = flow_kl_estimate(target, r, c, 2000, 11);
  EXPECT_LT(kl, 0.05);
  EXPECT_GT(kl, -0.05);
  EXPECT_EQ(s.sampler, "dnf");
}

TEST(FlowFit, DeterministicGivenSeed) {
  const Normal target(2, 1.0, 0.5);
  FlowConfig c = small_config(3);
  c.train_steps = 50;
  c.seed = 12;
  const FlowResult a = flow_fit(target, c);
  const FlowResult b = flow_fit(target, c);
  EXPECT_EQ(a.phi_params, b.phi_params);
  EXPECT_EQ(flow_sample(a, c, 300, 1).draws, flow_sample(b, c, 300, 1).draws);
}

class Exploding final : public LogDensity {
 public:
  int dim() const override { return 1; }
  double log_density(const Vector&, Vector*) const override { throw NumericalError("nan"); }
};

TEST(FlowFit, PersistentFailureThrowsAfterPatience) {
  FlowConfig c = small_config(2);
  c.train_steps = 200;
  c.patience = 20;
  EXPECT_THROW(flow_fit(Exploding{}, c), NumericalError);
}

}  // namespace
}  // namespace bpinn
