#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bpinn/adam.hpp"
#include "bpinn/errors.hpp"
#include "bpinn/mlp.hpp"
#include "bpinn/posterior.hpp"

namespace bpinn {

class Rng;
enum class RngStream : std::uint64_t;

// Training loss became non-finite. Carries the loss history up to that point.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, long step, std::vector<double> trace)
      : NumericalError(what, step), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

struct PinnConfig {
  int steps = 200000;
  AdamConfig adam{};
  std::uint64_t seed = 0;
  int trace_every = 100;
};

struct PinnResult {
  Vector theta;                  // surrogate parameters followed by unknown PDE parameters
  std::vector<double> unknowns;  // the trailing block, e.g. k
  std::vector<double> loss_trace;
  double final_loss = 0.0;       // negative log-likelihood
};

// Minimises the negative log-likelihood over the network parameters (and the
// unknown PDE parameters in inverse mode) with Adam, starting from Glorot
// weights and the prior mean of every unknown.
PinnResult pinn_train(ProblemPtr problem, std::shared_ptr<const SensorDataset> data,
                      const MlpArchitecture& arch, const PinnConfig& config);

// Inverted-dropout masks for every hidden layer: each entry is 0 with
// probability `rate`, 1/(1-rate) otherwise.
DropoutMasks draw_dropout_masks(const MlpArchitecture& arch, Eigen::Index n_points, double rate,
                                Rng& rng);

// MLP that draws fresh, per-point dropout masks on every recording. The mask
// generator is internal state, so one instance must not be shared between
// threads.
class DropoutSurrogate final : public Surrogate {
 public:
  DropoutSurrogate(MlpArchitecture arch, double rate, std::uint64_t seed, RngStream stream);
  ~DropoutSurrogate() override;

  int input_dim() const override { return arch_.input_dim; }
  int param_count() const override { return arch_.param_count(); }
  double rate() const { return rate_; }

  std::unique_ptr<SurrogateTape> record(const Eigen::Ref<const Vector>& theta,
                                        const Eigen::Ref<const Matrix>& points,
                                        JetOrder order) const override;

 private:
  MlpArchitecture arch_;
  double rate_;
  std::unique_ptr<Rng> rng_;
};

struct DropoutConfig {
  double rate = 0.01;
  int train_steps = 200000;
  int passes = 10000;
  int unknown_window = 10000;  // trailing steps whose unknowns are kept as samples
  AdamConfig adam{};
  std::uint64_t seed = 0;
  int trace_every = 100;

  void validate() const;
};

struct DropoutModel {
  MlpArchitecture arch;
  double rate = 0.0;
  Vector theta;            // final parameters, unknowns included
  Matrix unknown_samples;  // unknown_count x window
  std::vector<double> loss_trace;
  double final_loss = 0.0;
};

// PINN training with independent dropout masks on the hidden activations at
// every step. At rate 0 the trajectory is identical to pinn_train.
DropoutModel dropout_train(ProblemPtr problem, std::shared_ptr<const SensorDataset> data,
                           const MlpArchitecture& arch, const DropoutConfig& config);

// `passes` stochastic forward passes as a (passes x points) matrix. For f,
// pass m uses unknown sample m modulo the window.
Matrix dropout_passes(const PdeProblem& problem, const DropoutModel& model, const Matrix& points,
                      Quantity quantity, int passes, std::uint64_t seed);

PredictiveStats dropout_predict(const PdeProblem& problem, const DropoutModel& model,
                                const Matrix& points, Quantity quantity, int passes,
                                std::uint64_t seed);

}  // namespace bpinn
