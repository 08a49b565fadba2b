#include "bpinn/gp.hpp"

#include <Eigen/Cholesky>

#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {

PriorKernelEstimate estimate_prior_kernel(const MlpArchitecture& arch, const Vector& prior_std,
                                          const Vector& grid, long n_samples, std::uint64_t seed) {
  arch.validate();
  if (arch.input_dim != 1) throw ConfigError("prior kernel estimation supports one-dimensional inputs");
  if (n_samples < 2) throw ConfigError("prior kernel estimation needs at least two samples");
  if (prior_std.size() != arch.param_count()) throw DimensionError("prior std must cover every parameter");

  const Eigen::Index g = grid.size();
  const Matrix points = grid.transpose();
  Rng rng(seed, RngStream::kPriorDraws);
  Matrix values(n_samples, g);
  Vector theta(arch.param_count());
  for (long s = 0; s < n_samples; ++s) {
    rng.fill_normal(theta);
    theta.array() *= prior_std.array();
    MlpTape tape(arch, theta, points, JetOrder::kValue, 1);
    values.row(s) = tape.jets().value.transpose();
  }

  PriorKernelEstimate est;
  est.grid = grid;
  est.n_samples = n_samples;
  const double n = static_cast<double>(n_samples);
  est.mean = values.colwise().mean().transpose();
  values.rowwise() -= est.mean.transpose();
  est.covariance = values.transpose() * values / n;
  est.covariance = 0.5 * (est.covariance + est.covariance.transpose()).eval();
  const Matrix sq = values.array().square().matrix();
  const Matrix fourth = sq.transpose() * sq / n;
  est.standard_errors = ((fourth.array() - est.covariance.array().square()).max(0.0) / n).sqrt().matrix();
  return est;
}

GpPrediction gp_regress(const Matrix& kernel, Eigen::Index n_train, const Vector& observations,
                        const Vector& noise_std) {
  if (kernel.rows() != kernel.cols() || n_train > kernel.rows() || n_train < 1)
    throw DimensionError("kernel must be square and cover the training points");
  if (observations.size() != n_train || noise_std.size() != n_train)
    throw DimensionError("observations and noise must match the training block");
  if (!(noise_std.array() > 0.0).all()) throw ConfigError("noise standard deviations must be positive");

  const Eigen::Index m = kernel.rows() - n_train;
  const Matrix k_tt = kernel.topLeftCorner(n_train, n_train);
  const Matrix k_ts = kernel.topRightCorner(n_train, m);
  const Vector prior_var = kernel.diagonal().tail(m);

  GpPrediction out;
  for (double jitter : {1e-10, 1e-9, 1e-8, 1e-7, 1e-6}) {
    Matrix a = k_tt;
    a.diagonal().array() += noise_std.array().square() + jitter;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) continue;
    const Vector alpha = llt.solve(observations);
    const Matrix v = llt.matrixL().solve(k_ts);
    out.mean = k_ts.transpose() * alpha;
    out.std = (prior_var - v.colwise().squaredNorm().transpose()).cwiseMax(0.0).cwiseSqrt();
    out.jitter = jitter;
    if (out.mean.allFinite() && out.std.allFinite()) return out;
  }
  throw NumericalError("GP factorization failed after jitter escalation to 1e-6");
}

GpPrediction gp_regress(const KernelFn& kernel, const Vector& train_x, const Vector& observations,
                        const Vector& noise_std, const Vector& test_x) {
  const Eigen::Index n = train_x.size(), m = test_x.size();
  Vector all(n + m);
  all << train_x, test_x;
  Matrix k(n + m, n + m);
  for (Eigen::Index i = 0; i < n + m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(all[i], all[j]);
  return gp_regress(k, n, observations, noise_std);
}

}  // namespace bpinn
