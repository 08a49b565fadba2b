#pragma once

#include <memory>
#include <vector>

#include "bpinn/surrogate.hpp"

namespace bpinn {

// One eigenfunction of the exponential kernel on [-a, a]:
//   even:  psi(x) = cos(w x) / sqrt(a + sin(2 w a) / (2 w))
//   odd:   psi(x) = sin(w x) / sqrt(a - sin(2 w a) / (2 w))
struct KLMode {
  double frequency = 0.0;
  bool even = true;
  double norm = 1.0;  // multiplies the cos/sin factor
  double eigenvalue = 0.0;
};

// Leading eigenpairs of the integral operator with kernel
// exp(-|x - x'| / corr_length) on [-half_width, half_width], sorted by
// decreasing eigenvalue.
struct KLBasis {
  double corr_length = 0.25;
  double half_width = 1.0;
  std::vector<KLMode> modes;

  int n_terms() const { return static_cast<int>(modes.size()); }
  Vector eigenvalues() const;

  // psi_i and its first two derivatives at x.
  double eigenfunction(int i, double x) const;
  double eigenfunction_d1(int i, double x) const;
  double eigenfunction_d2(int i, double x) const;
};

// Frequencies come from bisection on the transcendental equations
//   c cos(w a) - w sin(w a) = 0  (even),  w cos(w a) + c sin(w a) = 0  (odd),
// c = 1/corr_length, inside the intervals between consecutive poles of
// tan(w a). Throws ConvergenceError naming the mode when a bracket fails.
KLBasis kl_eigenpairs(double corr_length, double half_width, int n_terms);

// Jet of sum_i sqrt(alpha_i) psi_i(x) theta_i at a 1-D point. Throws
// DomainError when |x| > half_width.
Jet kl_eval(const KLBasis& basis, const Eigen::Ref<const Vector>& theta, double x);

class KLSurrogate final : public Surrogate {
 public:
  explicit KLSurrogate(KLBasis basis);

  const KLBasis& basis() const { return basis_; }
  int input_dim() const override { return 1; }
  int param_count() const override { return basis_.n_terms(); }

  std::unique_ptr<SurrogateTape> record(const Eigen::Ref<const Vector>& theta,
                                        const Eigen::Ref<const Matrix>& points,
                                        JetOrder order) const override;

 private:
  KLBasis basis_;
};

}  // namespace bpinn
