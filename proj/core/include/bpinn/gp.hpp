#pragma once

#include <cstdint>
#include <functional>

#include "bpinn/mlp.hpp"

namespace bpinn {

// Monte-Carlo estimate of k(x1, x2) = cov(u(x1), u(x2)) for an MLP whose
// parameters are drawn from independent zero-mean Gaussians.
struct PriorKernelEstimate {
  Vector grid;
  Vector mean;
  Matrix covariance;       // divide-by-n estimate
  Matrix standard_errors;  // Monte-Carlo standard error of every entry
  long n_samples = 0;
};

// `prior_std` gives the standard deviation of every network parameter (see
// layer_prior_std). One-dimensional inputs only.
PriorKernelEstimate estimate_prior_kernel(const MlpArchitecture& arch, const Vector& prior_std,
                                          const Vector& grid, long n_samples, std::uint64_t seed);

struct GpPrediction {
  Vector mean;
  Vector std;
  double jitter = 0.0;  // diagonal jitter that made the factorization succeed
};

// Zero-mean GP posterior. `kernel` is the joint prior covariance over
// [training points | test points], `n_train` the size of the leading block.
// Jitter escalates from 1e-10 to 1e-6; NumericalError if all attempts fail.
GpPrediction gp_regress(const Matrix& kernel, Eigen::Index n_train, const Vector& observations,
                        const Vector& noise_std);

// Kernel from a callable, evaluated on [train | test].
using KernelFn = std::function<double(double, double)>;
GpPrediction gp_regress(const KernelFn& kernel, const Vector& train_x, const Vector& observations,
                        const Vector& noise_std, const Vector& test_x);

}  // namespace bpinn
