#pragma once

#include <cstdint>
#include <deque>
#include <functional>

#include "bpinn/posterior.hpp"

namespace bpinn {

struct HmcConfig {
  double step_size = 0.1;
  int leapfrog_steps = 50;
  int burn_in = 2000;
  int total_samples = 15000;  // chain iterations, burn-in included
  int keep_last = 10000;
  std::uint64_t seed = 0;
  bool adapt_step_size = true;
};

struct HmcDiagnostics {
  double acceptance_rate = 0.0;          // after burn-in
  double burn_in_acceptance_rate = 0.0;
  double final_step_size = 0.0;
  long divergences = 0;
  double max_abs_energy_error = 0.0;     // over post-burn-in trajectories
};

struct HmcResult {
  PosteriorSamples samples;
  HmcDiagnostics diagnostics;
};

// U(theta) and its gradient; returns U.
using PotentialFn = std::function<double(const Vector& theta, Vector& grad)>;

struct LeapfrogState {
  Vector theta;
  Vector momentum;
  double potential = 0.0;
  Vector grad;  // grad U at theta
  bool finite = true;
};

// L steps of half-kick / drift / half-kick with identity mass. `start.grad`
// must hold grad U(start.theta). A non-finite potential or gradient stops the
// integration and returns with finite == false.
LeapfrogState leapfrog(const PotentialFn& potential, LeapfrogState start, double step_size,
                       int steps);

// Convenience overload for tests: only theta and momentum are returned.
std::pair<Vector, Vector> leapfrog(const std::function<Vector(const Vector&)>& grad_u,
                                   const Vector& theta, const Vector& momentum, double step_size,
                                   int steps);

// Burn-in step-size rule: running acceptance above 0.9 multiplies the step by
// 1.1, below 0.6 divides it by 1.1. The window holds at most `window`
// iterations taken at the current step size; it restarts after every change
// and a decision needs at least `min_fill` entries. Without the restart the
// window lags the step and the step oscillates over orders of magnitude.
class StepSizeAdapter {
 public:
  explicit StepSizeAdapter(double initial, int window = 100, int min_fill = 3)
      : step_(initial), window_(window), min_fill_(min_fill) {}

  double update(bool accepted);
  double step_size() const { return step_; }
  double window_acceptance() const;
  int window_size() const { return static_cast<int>(recent_.size()); }

 private:
  double step_;
  int window_;
  int min_fill_;
  std::deque<bool> recent_;
  int accepted_in_window_ = 0;
};

// Hamiltonian Monte Carlo on exp(target.log_density). Starts from
// target.initial_state, resamples momentum each iteration and accepts with
// probability min(1, exp(H_old - H_new)).
HmcResult hmc_sample(const LogDensity& target, const HmcConfig& config);
HmcResult hmc_sample(const LogDensity& target, const HmcConfig& config, const Vector& initial);

}  // namespace bpinn
