#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bpinn/adam.hpp"
#include "bpinn/mlp.hpp"
#include "bpinn/posterior.hpp"

namespace bpinn {

// Potential flow du/dt = grad_u phi(u, t) from a standard normal base,
// integrated by forward Euler on [0, time_span].
struct FlowConfig {
  double time_span = 1.0;
  int euler_steps = 50;
  std::vector<int> hidden_widths{128, 128, 128};
  int train_steps = 100000;
  int batch = 16;
  AdamConfig adam{1e-4, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 0;
  int patience = 100;  // consecutive non-finite steps tolerated
  int trace_every = 100;

  double dt() const { return time_span / euler_steps; }
  void validate() const;  // ConfigError
};

// grad_u phi and the Laplacian of phi at (u, t).
using PotentialField = std::function<void(const Vector& u, double t, Vector& grad, double& laplacian)>;

struct FlowPoint {
  Vector sample;       // G(z)
  double log_density;  // log density of the pushed-forward distribution at G(z)
};

// Euler recursion  u_i = u_{i-1} + dt grad phi(u_{i-1}, t_{i-1}),
//                  log q_i = log q_{i-1} - dt lap phi(u_{i-1}, t_{i-1}).
// Throws NumericalError carrying the Euler step index on a non-finite state.
FlowPoint flow_forward(const PotentialField& phi, const FlowConfig& config, const Vector& z,
                       double log_density_z);
// As above with log_density_z taken from the standard normal base.
FlowPoint flow_forward(const PotentialField& phi, const FlowConfig& config, const Vector& z);

// phi as an MLP on (u, t): input dimension dim + 1, scalar output.
MlpArchitecture flow_architecture(int dim, const std::vector<int>& hidden_widths);

// Xavier weights with a zero output layer, so the untrained flow is the
// identity map.
Vector flow_init(const MlpArchitecture& arch, std::uint64_t seed);

// Batched MLP flow over the columns of `z` (dim x N).
struct FlowBatch {
  Matrix samples;
  Vector log_density;
};
FlowBatch flow_forward(const MlpArchitecture& arch, const Vector& phi_params, const FlowConfig& config,
                       const Matrix& z);

struct FlowResult {
  MlpArchitecture arch;
  Vector phi_params;
  std::vector<double> kl_trace;  // Monte-Carlo E[log q - log p], every trace_every steps
  double final_kl = 0.0;
};

// Batch estimate of E_z[ log q(G(z)) - log p(G(z)) ] over the columns of `z`
// and, when `grad` is non-null, its exact gradient with respect to phi.
// Throws NumericalError on a non-finite value or gradient.
double flow_objective(const LogDensity& target, const MlpArchitecture& arch, const Vector& phi_params,
                      const FlowConfig& config, const Matrix& z, Vector* grad);

// Minimises E_z[ log q(G(z)) - log p(G(z)) ] over phi with Adam. Throws
// NumericalError after `patience` consecutive non-finite estimates.
FlowResult flow_fit(const LogDensity& target, const FlowConfig& config);

// Monte-Carlo estimate of E_z[ log q(G(z)) - log p(G(z)) ] with `count` draws.
double flow_kl_estimate(const LogDensity& target, const FlowResult& flow, const FlowConfig& config,
                        int count, std::uint64_t seed);

PosteriorSamples flow_sample(const FlowResult& flow, const FlowConfig& config, int count,
                             std::uint64_t seed);

}  // namespace bpinn
