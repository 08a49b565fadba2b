#include "bpinn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

InferenceMode mode_for(const PdeProblem& problem) {
  return problem.unknown_count() > 0 ? InferenceMode::kInverse : InferenceMode::kForward;
}

Vector initial_point(const LogPosteriorTarget& target, const MlpArchitecture& arch, std::uint64_t seed) {
  Rng rng(seed, RngStream::kInit);
  Vector theta = Vector::Zero(target.dim());
  theta.head(arch.param_count()) = xavier_init(arch, rng);
  const auto& decls = target.problem().params();
  int j = arch.param_count();
  for (const auto& p : decls)
    if (p.unknown) theta[j++] = p.prior_mean;
  return theta;
}

struct TrainOutcome {
  Vector theta;
  std::vector<double> trace;
  double final_loss = 0.0;
  Matrix unknown_samples;
};

TrainOutcome train(const LogPosteriorTarget& target, const MlpArchitecture& arch, int steps,
                   const AdamConfig& adam_config, std::uint64_t seed, int trace_every, int window) {
  TrainOutcome out;
  out.theta = initial_point(target, arch, seed);
  const int nk = target.unknown_count();
  const int kept = std::min(window, steps);
  out.unknown_samples.resize(nk, kept);

  AdamState adam(adam_config, out.theta.size());
  Vector grad;
  for (int step = 0; step < steps; ++step) {
    double loss = 0.0;
    try {
      loss = -target.log_likelihood(out.theta, &grad);
    } catch (const NumericalError&) {
      loss = std::nan("");
    }
    if (!std::isfinite(loss))
      throw DivergenceError("training loss became non-finite at step " + std::to_string(step), step,
                            out.trace);
    grad = -grad;
    adam_step(adam, out.theta, grad);
    out.final_loss = loss;
    if (trace_every > 0 && step % trace_every == 0) out.trace.push_back(loss);
    const int slot = step - (steps - kept);
    if (slot >= 0 && nk > 0) out.unknown_samples.col(slot) = out.theta.tail(nk);
  }
  return out;
}

}  // namespace

PinnResult pinn_train(ProblemPtr problem, std::shared_ptr<const SensorDataset> data,
                      const MlpArchitecture& arch, const PinnConfig& config) {
  if (config.steps < 0) throw ConfigError("PINN steps must be non-negative");
  const InferenceMode mode = mode_for(*problem);
  LogPosteriorTarget target(problem, std::make_shared<MlpSurrogate>(arch), std::move(data), mode);
  TrainOutcome t = train(target, arch, config.steps, config.adam, config.seed, config.trace_every, 0);
  PinnResult r;
  r.theta = std::move(t.theta);
  for (int j = 0; j < target.unknown_count(); ++j) r.unknowns.push_back(r.theta[arch.param_count() + j]);
  r.loss_trace = std::move(t.trace);
  r.final_loss = t.final_loss;
  return r;
}

DropoutMasks draw_dropout_masks(const MlpArchitecture& arch, Eigen::Index n_points, double rate,
                                Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  const double keep_scale = 1.0 / (1.0 - rate);
  DropoutMasks masks;
  masks.reserve(arch.hidden_widths.size());
  for (int width : arch.hidden_widths) {
    Matrix m(width, n_points);
    for (Eigen::Index j = 0; j < n_points; ++j)
      for (int i = 0; i < width; ++i) m(i, j) = rng.bernoulli(rate) ? 0.0 : keep_scale;
    masks.push_back(std::move(m));
  }
  return masks;
}

DropoutSurrogate::DropoutSurrogate(MlpArchitecture arch, double rate, std::uint64_t seed,
                                   RngStream stream)
    : arch_(std::move(arch)), rate_(rate), rng_(std::make_unique<Rng>(seed, stream)) {
  arch_.validate();
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

DropoutSurrogate::~DropoutSurrogate() = default;

std::unique_ptr<SurrogateTape> DropoutSurrogate::record(const Eigen::Ref<const Vector>& theta,
                                                        const Eigen::Ref<const Matrix>& points,
                                                        JetOrder order) const {
  if (rate_ == 0.0) return std::make_unique<MlpTape>(arch_, theta, points, order, arch_.input_dim);
  const DropoutMasks masks = draw_dropout_masks(arch_, points.cols(), rate_, *rng_);
  return std::make_unique<MlpTape>(arch_, theta, points, order, arch_.input_dim, &masks);
}

void DropoutConfig::validate() const {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  if (train_steps < 0 || passes < 1 || unknown_window < 1)
    throw ConfigError("dropout needs train_steps >= 0, passes >= 1 and unknown_window >= 1");
}

DropoutModel dropout_train(ProblemPtr problem, std::shared_ptr<const SensorDataset> data,
                           const MlpArchitecture& arch, const DropoutConfig& config) {
  config.validate();
  const InferenceMode mode = mode_for(*problem);
  auto surrogate = std::make_shared<DropoutSurrogate>(arch, config.rate, config.seed, RngStream::kDropoutMask);
  LogPosteriorTarget target(problem, surrogate, std::move(data), mode);
  TrainOutcome t = train(target, arch, config.train_steps, config.adam, config.seed, config.trace_every,
                         config.unknown_window);
  DropoutModel model;
  model.arch = arch;
  model.rate = config.rate;
  model.theta = std::move(t.theta);
  model.unknown_samples = std::move(t.unknown_samples);
  model.loss_trace = std::move(t.trace);
  model.final_loss = t.final_loss;
  return model;
}

Matrix dropout_passes(const PdeProblem& problem, const DropoutModel& model, const Matrix& points,
                      Quantity quantity, int passes, std::uint64_t seed) {
  if (passes < 1) throw ConfigError("dropout prediction needs at least one pass");
  if (quantity == Quantity::kF && !problem.has_residual())
    throw ConfigError("problem '" + problem.name() + "' has no f to predict");
  const int ns = model.arch.param_count();
  const auto net = model.theta.head(ns);
  const JetOrder order = quantity == Quantity::kU ? JetOrder::kValue : JetOrder::kSecond;
  Rng rng(seed, RngStream::kPredictive);

  std::vector<double> params = problem.true_values();
  std::vector<int> slots;
  for (int i = 0; i < static_cast<int>(problem.params().size()); ++i)
    if (problem.params()[i].unknown) slots.push_back(i);

  Matrix out(passes, points.cols());
  for (int m = 0; m < passes; ++m) {
    const DropoutMasks masks = draw_dropout_masks(model.arch, points.cols(), model.rate, rng);
    MlpTape tape(model.arch, net, points, order, model.arch.input_dim, model.rate > 0.0 ? &masks : nullptr);
    const JetBatch& jets = tape.jets();
    if (quantity == Quantity::kU) {
      out.row(m) = jets.value.transpose();
      continue;
    }
    for (std::size_t j = 0; j < slots.size(); ++j) {
      params[slots[j]] = model.unknown_samples.cols() > 0
                             ? model.unknown_samples(static_cast<Eigen::Index>(j), m % model.unknown_samples.cols())
                             : model.theta[ns + static_cast<Eigen::Index>(j)];
    }
    for (Eigen::Index j = 0; j < points.cols(); ++j) out(m, j) = problem.residual(jets.at(j), params).f;
  }
  return out;
}

PredictiveStats dropout_predict(const PdeProblem& problem, const DropoutModel& model,
                                const Matrix& points, Quantity quantity, int passes,
                                std::uint64_t seed) {
  return predictive_stats(dropout_passes(problem, model, points, quantity, passes, seed));
}

}  // namespace bpinn
