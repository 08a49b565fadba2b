#include "bpinn/adam.hpp"

#include <cmath>

#include "bpinn/errors.hpp"

namespace bpinn {

void adam_step(AdamState& state, Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& gradient) {
  if (gradient.size() != params.size() || state.m.size() != params.size())
    throw DimensionError("Adam state, parameters and gradient must have equal length");
  const AdamConfig& c = state.config;
  ++state.step;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * gradient;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * gradient.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  params.array() -= c.lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + c.epsilon);
}

}  // namespace bpinn
