#include <benchmark/benchmark.h>

#include "bpinn/datagen.hpp"
#include "bpinn/flow.hpp"
#include "bpinn/kl.hpp"
#include "bpinn/mlp.hpp"
#include "bpinn/posterior.hpp"
#include "bpinn/rng.hpp"

namespace {

using namespace bpinn;

const MlpArchitecture kNet{1, {50, 50}};

// Second-order jets of the 2x50 network over a batch of points.
void BM_MlpJetBatch(benchmark::State& state) {
  Rng rng(1, RngStream::kInit);
  const Vector theta = rng.normal_vector(kNet.param_count());
  const Matrix pts = Vector::LinSpaced(state.range(0), -0.7, 0.7).transpose();
  for (auto _ : state) {
    MlpTape tape(kNet, theta, pts, JetOrder::kSecond, 1);
    benchmark::DoNotOptimize(tape.jets().value.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpJetBatch)->Arg(1)->Arg(40)->Arg(600);

// One HMC gradient on the inverse_reaction1d posterior.
void BM_LogPosteriorGradient(benchmark::State& state) {
  const auto problem = make_problem("inverse_reaction1d");
  auto data = std::make_shared<const SensorDataset>(experiment_dataset(*problem, 0.01, 2020));
  std::shared_ptr<const Surrogate> surrogate;
  if (state.range(0) == 0)
    surrogate = std::make_shared<MlpSurrogate>(kNet);
  else
    surrogate = std::make_shared<KLSurrogate>(kl_eigenpairs(0.25, 1.0, 20));
  const LogPosteriorTarget target(problem, surrogate, data, InferenceMode::kInverse);
  Rng rng(2, RngStream::kInit);
  const Vector theta = target.initial_state(rng);
  Vector g;
  for (auto _ : state) benchmark::DoNotOptimize(target.log_posterior(theta, &g));
  state.SetLabel(state.range(0) == 0 ? "bnn" : "kl");
}
BENCHMARK(BM_LogPosteriorGradient)->Arg(0)->Arg(1);

void BM_KlEval(benchmark::State& state) {
  const KLBasis basis = kl_eigenpairs(0.25, 1.0, 20);
  Rng rng(3, RngStream::kInit);
  const Vector theta = rng.normal_vector(20);
  double x = -0.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kl_eval(basis, theta, x).value);
    x = x > 0.9 ? -0.9 : x + 1e-3;
  }
}
BENCHMARK(BM_KlEval);

class StdNormal final : public LogDensity {
 public:
  explicit StdNormal(int d) : d_(d) {}
  int dim() const override { return d_; }
  double log_density(const Vector& theta, Vector* grad) const override {
    if (grad) *grad = -theta;
    return -0.5 * theta.squaredNorm();
  }

 private:
  int d_;
};

// One DNF training objective and gradient: batch 16, 10 Euler steps, 3x128.
void BM_FlowObjectiveGradient(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  FlowConfig c;
  c.euler_steps = 10;
  const MlpArchitecture arch = flow_architecture(d, c.hidden_widths);
  Rng rng(4, RngStream::kFlow);
  const Vector params = 0.05 * rng.normal_vector(arch.param_count());
  Matrix z(d, c.batch);
  for (int j = 0; j < c.batch; ++j) rng.fill_normal(z.col(j));
  const StdNormal target(d);
  Vector g;
  for (auto _ : state) benchmark::DoNotOptimize(flow_objective(target, arch, params, c, z, &g));
}
BENCHMARK(BM_FlowObjectiveGradient)->Arg(1)->Arg(21)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
