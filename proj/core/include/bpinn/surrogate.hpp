#pragma once

#include <memory>

#include <Eigen/Core>

namespace bpinn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Value, gradient and diagonal of the Hessian of a scalar field at one point.
struct Jet {
  double value = 0.0;
  Vector grad;
  Vector hess_diag;
};

// How much of the jet an evaluation has to produce.
enum class JetOrder { kValue = 0, kFirst = 1, kSecond = 2 };

// Jets of one scalar field at N points, stored column-per-point.
// `grad` and `hess` are (deriv_dims x N); they are empty below the order that
// was requested.
struct JetBatch {
  Vector value;
  Matrix grad;
  Matrix hess;

  Eigen::Index size() const { return value.size(); }
  Jet at(Eigen::Index i) const;

  // Zero-filled batch shaped like a recording with the given order.
  static JetBatch zeros(Eigen::Index n_points, Eigen::Index deriv_dims, JetOrder order);
};

// Forward evaluation of a surrogate that can later be differentiated with
// respect to its parameters.
class SurrogateTape {
 public:
  virtual ~SurrogateTape() = default;

  virtual const JetBatch& jets() const = 0;

  // Adds d/dtheta of  sum_n <adjoint_n, jet_n>  to `grad`. `adjoint` must be
  // shaped like jets(); channels above the recorded order are ignored.
  virtual void pullback(const JetBatch& adjoint, Eigen::Ref<Vector> grad) const = 0;
};

// A parameterised scalar field u(x; theta) on R^input_dim.
class Surrogate {
 public:
  virtual ~Surrogate() = default;

  virtual int input_dim() const = 0;
  virtual int param_count() const = 0;

  // `points` is (input_dim x N). Only the leading param_count() entries of
  // `theta` are read.
  virtual std::unique_ptr<SurrogateTape> record(const Eigen::Ref<const Vector>& theta,
                                                const Eigen::Ref<const Matrix>& points,
                                                JetOrder order) const = 0;

  JetBatch evaluate(const Eigen::Ref<const Vector>& theta, const Eigen::Ref<const Matrix>& points,
                    JetOrder order) const {
    return record(theta, points, order)->jets();
  }
};

}  // namespace bpinn
