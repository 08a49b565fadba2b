#pragma once

#include <cstdint>
#include <vector>

#include "bpinn/adam.hpp"
#include "bpinn/posterior.hpp"

namespace bpinn {

// Mean-field Gaussian Q(theta) = prod_i N(mu_i, softplus(rho_i)^2).
struct ViParams {
  Vector mu;
  Vector rho;

  ViParams() = default;
  ViParams(Vector mu_, Vector rho_);

  Eigen::Index dim() const { return mu.size(); }
  Vector stddev() const;  // ln(1 + exp(rho)), computed stably
};

struct ViConfig {
  int steps = 200000;
  int batch = 5;
  AdamConfig adam{};
  std::uint64_t seed = 0;
  int trace_every = 100;
};

struct ViResult {
  ViParams params;
  std::vector<double> objective_trace;  // Monte-Carlo objective every trace_every steps
  double final_objective = 0.0;
};

// Minimises the Monte-Carlo estimate of
//   E_Q[ ln Q(theta) - ln P(theta) - ln P(D | theta) ]
// over (mu, rho) with Adam, drawing theta = mu + softplus(rho) * z with z
// standard normal. Throws NumericalError after 100 consecutive non-finite
// objective estimates.
ViResult vi_fit(const LogDensity& target, const ViParams& init, const ViConfig& config);

// Monte-Carlo objective at fixed parameters with the given batch.
double vi_objective(const LogDensity& target, const ViParams& params, int batch, Rng& rng);

// `count` reparameterised draws.
PosteriorSamples vi_sample(const ViParams& params, int count, std::uint64_t seed);

}  // namespace bpinn
