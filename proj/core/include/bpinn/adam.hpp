#pragma once

#include "bpinn/surrogate.hpp"

namespace bpinn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam (Kingma & Ba).
struct AdamState {
  AdamConfig config;
  long step = 0;
  Vector m;
  Vector v;

  AdamState() = default;
  AdamState(AdamConfig cfg, Eigen::Index n) : config(cfg), m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

// Descends along `gradient`: params -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(AdamState& state, Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& gradient);

}  // namespace bpinn
