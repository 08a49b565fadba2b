#include "bpinn/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {

LeapfrogState leapfrog(const PotentialFn& potential, LeapfrogState s, double step_size, int steps) {
  for (int i = 0; i < steps; ++i) {
    s.momentum -= 0.5 * step_size * s.grad;
    s.theta += step_size * s.momentum;
    s.potential = potential(s.theta, s.grad);
    if (!std::isfinite(s.potential) || !s.grad.allFinite()) {
      s.finite = false;
      return s;
    }
    s.momentum -= 0.5 * step_size * s.grad;
  }
  return s;
}

std::pair<Vector, Vector> leapfrog(const std::function<Vector(const Vector&)>& grad_u,
                                   const Vector& theta, const Vector& momentum, double step_size,
                                   int steps) {
  PotentialFn potential = [&](const Vector& t, Vector& g) {
    g = grad_u(t);
    return 0.0;
  };
  LeapfrogState s{theta, momentum, 0.0, grad_u(theta), true};
  s = leapfrog(potential, std::move(s), step_size, steps);
  if (!s.finite) throw NumericalError("leapfrog trajectory diverged");
  return {s.theta, s.momentum};
}

double StepSizeAdapter::update(bool accepted) {
  recent_.push_back(accepted);
  accepted_in_window_ += accepted ? 1 : 0;
  if (static_cast<int>(recent_.size()) > window_) {
    accepted_in_window_ -= recent_.front() ? 1 : 0;
    recent_.pop_front();
  }
  if (static_cast<int>(recent_.size()) < min_fill_) return step_;
  const double rate = window_acceptance();
  if (rate > 0.9) step_ *= 1.1;
  else if (rate < 0.6) step_ /= 1.1;
  else return step_;
  recent_.clear();
  accepted_in_window_ = 0;
  return step_;
}

double StepSizeAdapter::window_acceptance() const {
  if (recent_.empty()) return 0.0;
  return static_cast<double>(accepted_in_window_) / static_cast<double>(recent_.size());
}

HmcResult hmc_sample(const LogDensity& target, const HmcConfig& config) {
  Rng init_rng(config.seed, RngStream::kInit);
  return hmc_sample(target, config, target.initial_state(init_rng));
}

HmcResult hmc_sample(const LogDensity& target, const HmcConfig& config, const Vector& initial) {
  if (!(config.step_size > 0.0) || config.leapfrog_steps < 1 || config.burn_in < 0 ||
      config.total_samples <= config.burn_in || config.keep_last < 1)
    throw ConfigError("HMC needs step_size > 0, leapfrog_steps >= 1 and total_samples > burn_in");
  const int d = target.dim();
  if (initial.size() != d) throw DimensionError("initial state does not match the target");

  // A target that fails numerically ends the trajectory as a divergence.
  PotentialFn potential = [&target](const Vector& theta, Vector& grad) {
    double lp = 0.0;
    try {
      lp = target.log_density(theta, &grad);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
    grad = -grad;
    return -lp;
  };

  Rng momentum_rng(config.seed, RngStream::kMomentum);
  Rng accept_rng(config.seed, RngStream::kAccept);

  LeapfrogState current{initial, Vector::Zero(d), 0.0, Vector(), true};
  current.potential = potential(current.theta, current.grad);
  if (!std::isfinite(current.potential) || current.grad.size() != d || !current.grad.allFinite())
    throw NumericalError("HMC initial state has a non-finite potential");

  const int total = config.total_samples;
  const int kept = std::min(config.keep_last, total - config.burn_in);
  const int keep_from = total - kept;

  HmcResult result;
  result.samples.draws.resize(d, kept);
  result.samples.seed = config.seed;
  result.samples.sampler = "hmc";

  StepSizeAdapter adapter(config.step_size);
  double step = config.step_size;
  long burn_accepts = 0, accepts = 0;

  for (int it = 0; it < total; ++it) {
    current.momentum = momentum_rng.normal_vector(d);
    const double h_old = current.potential + 0.5 * current.momentum.squaredNorm();
    LeapfrogState proposal = leapfrog(potential, current, step, config.leapfrog_steps);
    const double u = accept_rng.uniform();

    bool accepted = false;
    if (proposal.finite) {
      const double h_new = proposal.potential + 0.5 * proposal.momentum.squaredNorm();
      const double delta = h_new - h_old;
      if (std::isfinite(delta)) {
        accepted = std::log(u) < -delta;
        if (it >= config.burn_in)
          result.diagnostics.max_abs_energy_error =
              std::max(result.diagnostics.max_abs_energy_error, std::abs(delta));
      } else {
        ++result.diagnostics.divergences;
      }
    } else {
      ++result.diagnostics.divergences;
    }
    if (accepted) {
      current.theta = std::move(proposal.theta);
      current.potential = proposal.potential;
      current.grad = std::move(proposal.grad);
    }

    if (it < config.burn_in) {
      burn_accepts += accepted;
      if (config.adapt_step_size) step = adapter.update(accepted);
    } else {
      accepts += accepted;
    }
    if (it >= keep_from) result.samples.draws.col(it - keep_from) = current.theta;
  }

  auto& diag = result.diagnostics;
  diag.acceptance_rate = static_cast<double>(accepts) / (total - config.burn_in);
  diag.burn_in_acceptance_rate =
      config.burn_in > 0 ? static_cast<double>(burn_accepts) / config.burn_in : diag.acceptance_rate;
  diag.final_step_size = step;
  result.samples.acceptance_rate = diag.acceptance_rate;
  if (config.burn_in > 0 && diag.burn_in_acceptance_rate < 0.05)
    result.samples.warnings.push_back("HMC burn-in acceptance below 0.05; step size tuning failed");
  return result;
}

}  // namespace bpinn
