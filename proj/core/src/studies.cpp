#include "bpinn/studies.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "bpinn/dataset.hpp"
#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

MarginalStats moments(const std::string& quantity, double x, const Vector& v) {
  const double n = static_cast<double>(v.size());
  const Vector c = v.array() - v.mean();
  const double m2 = c.squaredNorm() / n;
  const double m4 = c.array().pow(4).sum() / n;
  MarginalStats s;
  s.quantity = quantity;
  s.x = x;
  s.stddev = std::sqrt(m2);
  s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  s.kurtosis_se = std::sqrt(24.0 / n);
  return s;
}

void write_histograms(const std::filesystem::path& path, const std::vector<double>& xs,
                      const std::vector<Vector>& samples, int bins) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "x,bin_center,density,gaussian_density\n";
  for (std::size_t p = 0; p < xs.size(); ++p) {
    const Vector& v = samples[p];
    const double sd = std::sqrt((v.array() - v.mean()).square().mean());
    // Symmetric range of four standard deviations keeps the bulk visible.
    const double lo = -4.0 * sd, hi = 4.0 * sd;
    const double width = (hi - lo) / bins;
    std::vector<long> counts(bins, 0);
    for (double s : v)
      if (s >= lo && s < hi) ++counts[std::min(bins - 1, static_cast<int>((s - lo) / width))];
    for (int b = 0; b < bins; ++b) {
      const double center = lo + (b + 0.5) * width;
      const double density = counts[b] / (static_cast<double>(v.size()) * width);
      const double gauss = sd > 0.0 ? std::exp(-0.5 * center * center / (sd * sd)) / (sd * std::sqrt(2.0 * std::numbers::pi))
                                    : 0.0;
      out << format_double(xs[p]) << ',' << format_double(center) << ',' << format_double(density) << ','
          << format_double(gauss) << '\n';
    }
  }
}

void write_matrix(const std::filesystem::path& path, const Vector& grid, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "x";
  for (double g : grid) out << ',' << format_double(g);
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << format_double(grid[i]);
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace

std::vector<MarginalStats> prior_density_study(const DensityStudyConfig& config,
                                               const std::filesystem::path& out_dir) {
  config.arch.validate();
  if (config.arch.input_dim != 1) throw ConfigError("the density study uses one-dimensional networks");
  if (config.n_samples < 1000) throw ConfigError("the density study needs at least 1000 samples");
  if (config.points.empty() || config.bins < 1) throw ConfigError("the density study needs points and bins");

  const Vector prior_std = layer_prior_std(config.arch, config.sigma_w, config.sigma_b);
  const Eigen::Index np = static_cast<Eigen::Index>(config.points.size());
  Matrix points(1, np);
  for (Eigen::Index j = 0; j < np; ++j) points(0, j) = config.points[j];

  std::vector<Vector> u(np, Vector(config.n_samples)), du = u, d2u = u;
  Rng rng(config.seed, RngStream::kPriorDraws);
  Vector theta(config.arch.param_count());
  for (long s = 0; s < config.n_samples; ++s) {
    rng.fill_normal(theta);
    theta.array() *= prior_std.array();
    const MlpTape tape(config.arch, theta, points, JetOrder::kSecond, 1);
    const JetBatch& j = tape.jets();
    for (Eigen::Index p = 0; p < np; ++p) {
      u[p][s] = j.value[p];
      du[p][s] = j.grad(0, p);
      d2u[p][s] = j.hess(0, p);
    }
  }

  std::vector<MarginalStats> stats;
  for (Eigen::Index p = 0; p < np; ++p) {
    stats.push_back(moments("u", config.points[p], u[p]));
    stats.push_back(moments("du", config.points[p], du[p]));
    stats.push_back(moments("d2u", config.points[p], d2u[p]));
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_histograms(out_dir / "prior_density_u.csv", config.points, u, config.bins);
    write_histograms(out_dir / "prior_density_du.csv", config.points, du, config.bins);
    write_histograms(out_dir / "prior_density_d2u.csv", config.points, d2u, config.bins);
  }
  return stats;
}

std::vector<KernelStudyCase> reference_kernel_cases() {
  return {
      {"a", {20, 20}, {1.0, std::sqrt(5.0 / 2.0), std::sqrt(5.0 / 2.0)}, {1.0}},
      {"b", {50, 50}, {1.0}, {1.0}},
      {"c", {100, 100}, {1.0, std::sqrt(1.0 / 2.0), std::sqrt(1.0 / 2.0)}, {1.0}},
      {"d", {20, 20}, {1.0}, {1.0}},
      {"e", {100, 100}, {1.0}, {1.0}},
  };
}

std::vector<PriorKernelEstimate> prior_covariance_study(const std::vector<KernelStudyCase>& cases,
                                                        const Vector& grid, long n_samples, std::uint64_t seed,
                                                        const std::filesystem::path& out_dir) {
  if (cases.empty()) throw ConfigError("the covariance study needs at least one case");
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  std::vector<PriorKernelEstimate> out;
  for (const KernelStudyCase& c : cases) {
    const MlpArchitecture arch{1, c.hidden_widths};
    arch.validate();
    const Vector prior_std = layer_prior_std(arch, c.sigma_w, c.sigma_b);
    out.push_back(estimate_prior_kernel(arch, prior_std, grid, n_samples, seed));
    if (!out_dir.empty()) {
      write_matrix(out_dir / ("prior_cov_" + c.label + ".csv"), grid, out.back().covariance);
      write_matrix(out_dir / ("prior_cov_" + c.label + "_se.csv"), grid, out.back().standard_errors);
    }
  }
  return out;
}

double max_standardized_difference(const PriorKernelEstimate& a, const PriorKernelEstimate& b) {
  if (a.covariance.rows() != b.covariance.rows()) throw DimensionError("kernel estimates use different grids");
  const Eigen::ArrayXXd se = (a.standard_errors.array().square() + b.standard_errors.array().square()).sqrt();
  return ((a.covariance - b.covariance).array().abs() / se).maxCoeff();
}

}  // namespace bpinn
