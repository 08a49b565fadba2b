#include "bpinn/vi.hpp"

#include <cmath>
#include <numbers>

#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ln Q at theta = mu + s z, as a function of z and s only.
double log_q(const Vector& z, const Vector& s) {
  return -0.5 * z.squaredNorm() - s.array().log().sum() - 0.5 * static_cast<double>(z.size()) * kLog2Pi;
}

}  // namespace

ViParams::ViParams(Vector mu_, Vector rho_) : mu(std::move(mu_)), rho(std::move(rho_)) {
  if (mu.size() != rho.size()) throw DimensionError("ViParams mu and rho must have equal length");
}

Vector ViParams::stddev() const { return rho.unaryExpr([](double r) { return softplus(r); }); }

double vi_objective(const LogDensity& target, const ViParams& params, int batch, Rng& rng) {
  const Vector s = params.stddev();
  double total = 0.0;
  for (int j = 0; j < batch; ++j) {
    const Vector z = rng.normal_vector(params.dim());
    const Vector theta = params.mu + s.cwiseProduct(z);
    total += log_q(z, s) - target.log_density(theta, nullptr);
  }
  return total / batch;
}

ViResult vi_fit(const LogDensity& target, const ViParams& init, const ViConfig& config) {
  const Eigen::Index d = init.dim();
  if (d != target.dim()) throw DimensionError("variational parameters do not match the target");
  if (config.steps < 0 || config.batch < 1) throw ConfigError("VI needs steps >= 0 and batch >= 1");

  // zeta = [mu | rho]
  Vector zeta(2 * d);
  zeta << init.mu, init.rho;
  AdamState adam(config.adam, 2 * d);
  Rng rng(config.seed, RngStream::kVariational);

  ViResult result;
  int non_finite_run = 0;
  Vector grad_zeta(2 * d), grad_log_p(d);

  for (int step = 0; step < config.steps; ++step) {
    const auto mu = zeta.head(d);
    const auto rho = zeta.tail(d);
    const Vector s = rho.unaryExpr([](double r) { return softplus(r); });
    const Vector ds_drho = rho.unaryExpr([](double r) { return sigmoid(r); });

    grad_zeta.setZero();
    double objective = 0.0;
    bool finite = true;
    for (int j = 0; j < config.batch; ++j) {
      const Vector z = rng.normal_vector(d);
      const Vector theta = mu + s.cwiseProduct(z);
      double lp = 0.0;
      try {
        lp = target.log_density(theta, &grad_log_p);
      } catch (const NumericalError&) {
        finite = false;
        continue;
      }
      objective += log_q(z, s) - lp;
      // d/dmu = -grad ln p;  d/ds = -1/s - grad ln p * z
      grad_zeta.head(d) -= grad_log_p;
      grad_zeta.tail(d).array() += (-1.0 / s.array() - grad_log_p.array() * z.array()) * ds_drho.array();
    }
    objective /= config.batch;
    grad_zeta /= config.batch;

    if (!finite || !std::isfinite(objective) || !grad_zeta.allFinite()) {
      if (++non_finite_run >= 100)
        throw NumericalError("VI objective non-finite for 100 consecutive steps", step);
      continue;
    }
    non_finite_run = 0;
    adam_step(adam, zeta, grad_zeta);
    result.final_objective = objective;
    if (config.trace_every > 0 && step % config.trace_every == 0) result.objective_trace.push_back(objective);
  }
  result.params = ViParams(zeta.head(d), zeta.tail(d));
  return result;
}

PosteriorSamples vi_sample(const ViParams& params, int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("vi_sample needs a positive count");
  Rng rng(seed, RngStream::kPredictive);
  const Vector s = params.stddev();
  PosteriorSamples out;
  out.draws.resize(params.dim(), count);
  for (int m = 0; m < count; ++m) out.draws.col(m) = params.mu + s.cwiseProduct(rng.normal_vector(params.dim()));
  out.seed = seed;
  out.sampler = "vi";
  return out;
}

}  // namespace bpinn
