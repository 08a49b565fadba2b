#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bpinn/surrogate.hpp"

namespace bpinn {

// Fully connected tanh network with one linear output.
//
// Parameter layout (part of the public contract): for each layer l = 0..L in
// order, the weight matrix W_l (N_{l+1} x N_l, row-major, so W_l[i][j]
// connects input j to unit i) followed by the bias b_l (N_{l+1}). Any
// PDE-parameter block is appended after the last bias.
struct MlpArchitecture {
  int input_dim = 1;
  std::vector<int> hidden_widths;

  int layer_count() const { return static_cast<int>(hidden_widths.size()) + 1; }
  int fan_in(int layer) const;
  int fan_out(int layer) const;
  int weight_offset(int layer) const;
  int bias_offset(int layer) const;
  int param_count() const;

  void validate() const;  // throws ConfigError
};

// Optional inverted-dropout masks, one (N_l x N_points) matrix per hidden
// layer. Entries are 0 or 1/(1-rate).
using DropoutMasks = std::vector<Matrix>;

// Forward-mode jet propagation with reverse accumulation for parameters.
//
// Each hidden layer carries channels [value | d/dx_i | d2/dx_i^2] for the
// first `deriv_dims` inputs; one GEMM per layer advances all channels. The
// value channel always uses its own product so results are bitwise
// independent of the requested order.
class MlpTape final : public SurrogateTape {
 public:
  MlpTape(const MlpArchitecture& arch, const Eigen::Ref<const Vector>& theta,
          const Eigen::Ref<const Matrix>& points, JetOrder order, int deriv_dims,
          const DropoutMasks* masks = nullptr);

  const JetBatch& jets() const override { return out_; }
  void pullback(const JetBatch& adjoint, Eigen::Ref<Vector> grad) const override;

  // As pullback, and also writes the adjoint with respect to the input
  // points (input_dim x N) to `input_grad`.
  void pullback(const JetBatch& adjoint, Eigen::Ref<Vector> grad,
                Eigen::Ref<Matrix> input_grad) const;

 private:
  void backward(const JetBatch& adjoint, Eigen::Ref<Vector> grad, Matrix* input_grad) const;

  MlpArchitecture arch_;
  Vector theta_;
  Matrix input_;
  int order_;
  int deriv_dims_;
  Eigen::Index n_;
  std::vector<Matrix> pre_;   // pre-activation channels per hidden layer
  std::vector<Matrix> act_;   // unmasked tanh values per hidden layer
  std::vector<Matrix> post_;  // post-activation channels (masked)
  std::vector<Matrix> masks_;
  JetBatch out_;
};

class MlpSurrogate final : public Surrogate {
 public:
  explicit MlpSurrogate(MlpArchitecture arch);

  const MlpArchitecture& architecture() const { return arch_; }
  int input_dim() const override { return arch_.input_dim; }
  int param_count() const override { return arch_.param_count(); }

  std::unique_ptr<SurrogateTape> record(const Eigen::Ref<const Vector>& theta,
                                        const Eigen::Ref<const Matrix>& points,
                                        JetOrder order) const override;

  std::unique_ptr<MlpTape> record_masked(const Eigen::Ref<const Vector>& theta,
                                         const Eigen::Ref<const Matrix>& points, JetOrder order,
                                         const DropoutMasks& masks) const;

 private:
  MlpArchitecture arch_;
};

// Single-point conveniences. Throw DimensionError on size mismatch.
double mlp_forward(const MlpArchitecture& arch, const Eigen::Ref<const Vector>& theta,
                   const Eigen::Ref<const Vector>& x);
Jet mlp_jet(const MlpArchitecture& arch, const Eigen::Ref<const Vector>& theta,
            const Eigen::Ref<const Vector>& x);

// A scalar functional F(theta) that reports its own exact gradient when
// `grad` is non-null.
using ScalarFunctional = std::function<double(const Vector& theta, Vector* grad)>;

// Exact gradient of `f` at `theta`; throws NumericalError naming the first
// non-finite component.
Vector param_gradient(const ScalarFunctional& f, const Vector& theta);

// Glorot-normal weights and zero biases.
Vector xavier_init(const MlpArchitecture& arch, class Rng& rng);

// Per-component prior standard deviations for layer-wise Gaussian priors.
// `sigma_w`/`sigma_b` hold one entry per layer (0..L) or a single entry
// applied to every layer.
Vector layer_prior_std(const MlpArchitecture& arch, const std::vector<double>& sigma_w,
                       const std::vector<double>& sigma_b);

}  // namespace bpinn
