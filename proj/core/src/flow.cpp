#include "bpinn/flow.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double standard_normal_log_density(const Eigen::Ref<const Vector>& z) {
  return -0.5 * z.squaredNorm() - 0.5 * static_cast<double>(z.size()) * kLog2Pi;
}

// Euler state at every step, kept for the backward pass.
struct Trajectory {
  std::vector<Matrix> states;                  // u_0 .. u_n, each dim x N
  std::vector<std::unique_ptr<MlpTape>> tapes;  // phi at (u_{i-1}, t_{i-1})
  Vector log_density;
};

Trajectory integrate(const MlpArchitecture& arch, const Vector& params, const FlowConfig& config,
                     const Matrix& z, bool keep_tapes) {
  const int d = static_cast<int>(z.rows());
  const Eigen::Index n = z.cols();
  const double dt = config.dt();
  Trajectory tr;
  tr.states.reserve(config.euler_steps + 1);
  tr.states.push_back(z);
  tr.log_density.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) tr.log_density[j] = standard_normal_log_density(z.col(j));

  Matrix input(d + 1, n);
  for (int i = 1; i <= config.euler_steps; ++i) {
    input.topRows(d) = tr.states.back();
    input.row(d).setConstant((i - 1) * dt);
    auto tape = std::make_unique<MlpTape>(arch, params, input, JetOrder::kSecond, d);
    const JetBatch& jets = tape->jets();
    Matrix next = tr.states.back() + dt * jets.grad;
    tr.log_density -= dt * jets.hess.colwise().sum().transpose();
    if (!next.allFinite() || !tr.log_density.allFinite())
      throw NumericalError("flow trajectory became non-finite at Euler step " + std::to_string(i), i);
    tr.states.push_back(std::move(next));
    if (keep_tapes) tr.tapes.push_back(std::move(tape));
  }
  return tr;
}

}  // namespace

void FlowConfig::validate() const {
  if (!(time_span > 0.0)) throw ConfigError("flow time span must be positive");
  if (euler_steps < 1) throw ConfigError("flow needs at least one Euler step");
  if (batch < 1 || train_steps < 0) throw ConfigError("flow needs batch >= 1 and train_steps >= 0");
  if (hidden_widths.empty()) throw ConfigError("flow potential needs a hidden layer");
}

FlowPoint flow_forward(const PotentialField& phi, const FlowConfig& config, const Vector& z,
                       double log_density_z) {
  config.validate();
  const double dt = config.dt();
  FlowPoint out{z, log_density_z};
  Vector grad(z.size());
  for (int i = 1; i <= config.euler_steps; ++i) {
    double lap = 0.0;
    phi(out.sample, (i - 1) * dt, grad, lap);
    out.sample += dt * grad;
    out.log_density -= dt * lap;
    if (!out.sample.allFinite() || !std::isfinite(out.log_density))
      throw NumericalError("flow trajectory became non-finite at Euler step " + std::to_string(i), i);
  }
  return out;
}

FlowPoint flow_forward(const PotentialField& phi, const FlowConfig& config, const Vector& z) {
  return flow_forward(phi, config, z, standard_normal_log_density(z));
}

MlpArchitecture flow_architecture(int dim, const std::vector<int>& hidden_widths) {
  MlpArchitecture arch{dim + 1, hidden_widths};
  arch.validate();
  return arch;
}

Vector flow_init(const MlpArchitecture& arch, std::uint64_t seed) {
  Rng rng(seed, RngStream::kInit);
  Vector params = xavier_init(arch, rng);
  const int last = arch.layer_count() - 1;
  params.segment(arch.weight_offset(last), arch.fan_in(last)).setZero();
  return params;
}

FlowBatch flow_forward(const MlpArchitecture& arch, const Vector& phi_params, const FlowConfig& config,
                       const Matrix& z) {
  config.validate();
  if (z.rows() + 1 != arch.input_dim) throw DimensionError("flow input dimension mismatch");
  Trajectory tr = integrate(arch, phi_params, config, z, false);
  return {std::move(tr.states.back()), std::move(tr.log_density)};
}

double flow_objective(const LogDensity& target, const MlpArchitecture& arch, const Vector& phi_params,
                      const FlowConfig& config, const Matrix& z, Vector* grad) {
  const int d = target.dim();
  const int nz = static_cast<int>(z.cols());
  if (z.rows() != d || arch.input_dim != d + 1) throw DimensionError("flow input dimension mismatch");
  if (nz < 1) throw ConfigError("flow objective needs at least one base draw");
  const double dt = config.dt();
  Trajectory tr = integrate(arch, phi_params, config, z, grad != nullptr);
  const Matrix& u = tr.states.back();
  Vector grad_log_p(d);
  Matrix ubar(d, nz);
  double kl = 0.0;
  for (int j = 0; j < nz; ++j) {
    const double lp = target.log_density(u.col(j), grad ? &grad_log_p : nullptr);
    kl += tr.log_density[j] - lp;
    if (grad) ubar.col(j) = -grad_log_p / nz;
  }
  kl /= nz;
  if (!std::isfinite(kl)) throw NumericalError("non-finite flow objective");
  if (!grad) return kl;
  if (!ubar.allFinite()) throw NumericalError("non-finite target gradient in flow objective");

  // Reverse through the Euler steps. The loss holds -dt lap phi / N_z per
  // sample and per step; the state adjoint flows through u + dt grad phi.
  grad->setZero(phi_params.size());
  Matrix input_grad(d + 1, nz);
  JetBatch adjoint = JetBatch::zeros(nz, d, JetOrder::kSecond);
  adjoint.hess.setConstant(-dt / nz);
  for (int i = config.euler_steps; i >= 1; --i) {
    adjoint.grad = dt * ubar;
    tr.tapes[i - 1]->pullback(adjoint, *grad, input_grad);
    ubar += input_grad.topRows(d);
  }
  if (!grad->allFinite()) throw NumericalError("non-finite flow gradient");
  return kl;
}

FlowResult flow_fit(const LogDensity& target, const FlowConfig& config) {
  config.validate();
  const int d = target.dim();
  FlowResult result;
  result.arch = flow_architecture(d, config.hidden_widths);
  result.phi_params = flow_init(result.arch, config.seed);

  AdamState adam(config.adam, result.phi_params.size());
  Rng rng(config.seed, RngStream::kFlow);
  Vector grad(result.phi_params.size());
  Matrix z(d, config.batch);
  int bad_run = 0;

  for (int step = 0; step < config.train_steps; ++step) {
    for (int j = 0; j < config.batch; ++j) rng.fill_normal(z.col(j));
    double kl = 0.0;
    try {
      kl = flow_objective(target, result.arch, result.phi_params, config, z, &grad);
    } catch (const NumericalError&) {
      if (++bad_run >= config.patience)
        throw NumericalError("flow objective non-finite for " + std::to_string(config.patience) +
                                 " consecutive steps",
                             step);
      continue;
    }
    bad_run = 0;
    adam_step(adam, result.phi_params, grad);
    result.final_kl = kl;
    if (config.trace_every > 0 && step % config.trace_every == 0) result.kl_trace.push_back(kl);
  }
  return result;
}

double flow_kl_estimate(const LogDensity& target, const FlowResult& flow, const FlowConfig& config,
                        int count, std::uint64_t seed) {
  Rng rng(seed, RngStream::kPredictive);
  Matrix z(target.dim(), count);
  for (int j = 0; j < count; ++j) rng.fill_normal(z.col(j));
  const FlowBatch out = flow_forward(flow.arch, flow.phi_params, config, z);
  double kl = 0.0;
  for (int j = 0; j < count; ++j) kl += out.log_density[j] - target.log_density(out.samples.col(j), nullptr);
  return kl / count;
}

PosteriorSamples flow_sample(const FlowResult& flow, const FlowConfig& config, int count,
                             std::uint64_t seed) {
  if (count < 1) throw ConfigError("flow_sample needs a positive count");
  const int d = flow.arch.input_dim - 1;
  Rng rng(seed, RngStream::kPredictive);
  PosteriorSamples out;
  out.draws.resize(d, count);
  // Chunked so the second-order tape stays small.
  constexpr int kChunk = 256;
  for (int start = 0; start < count; start += kChunk) {
    const int m = std::min(kChunk, count - start);
    Matrix z(d, m);
    for (int j = 0; j < m; ++j) rng.fill_normal(z.col(j));
    out.draws.middleCols(start, m) = flow_forward(flow.arch, flow.phi_params, config, z).samples;
  }
  out.seed = seed;
  out.sampler = "dnf";
  return out;
}

}  // namespace bpinn
