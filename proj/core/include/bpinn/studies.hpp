#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bpinn/gp.hpp"
#include "bpinn/mlp.hpp"

namespace bpinn {

// Sample moments of one prior marginal.
struct MarginalStats {
  std::string quantity;  // "u", "du", "d2u"
  double x = 0.0;
  double stddev = 0.0;
  double excess_kurtosis = 0.0;
  double kurtosis_se = 0.0;  // sqrt(24 / n), the Gaussian standard error

  bool inside_gaussian_band(double n_se = 3.0) const {
    return std::abs(excess_kurtosis) <= n_se * kurtosis_se;
  }
};

struct DensityStudyConfig {
  MlpArchitecture arch{1, {50, 50}};
  std::vector<double> sigma_w{1.0};
  std::vector<double> sigma_b{1.0};
  std::vector<double> points{0.0, 0.5, 1.0};
  long n_samples = 100000;
  int bins = 60;
  std::uint64_t seed = 0;
};

// Draws prior networks, records u, du/dx and d2u/dx2 at every point and, when
// `out_dir` is non-empty, writes prior_density_<quantity>.csv with columns
// x,bin_center,density,gaussian_density (zero-mean Gaussian with the sample
// standard deviation).
std::vector<MarginalStats> prior_density_study(const DensityStudyConfig& config,
                                               const std::filesystem::path& out_dir = {});

// One network/prior setting of the covariance study.
struct KernelStudyCase {
  std::string label;
  std::vector<int> hidden_widths;
  std::vector<double> sigma_w;  // one per layer or a single value
  std::vector<double> sigma_b;
};

// The five settings (a)-(e): widths 20/50/100 with sqrt(N) sigma_w fixed, and
// 20/100 with unit sigma_w.
std::vector<KernelStudyCase> reference_kernel_cases();

// Writes prior_cov_<label>.csv (grid x grid matrix with a header row of grid
// points) and prior_cov_<label>_se.csv when `out_dir` is non-empty.
std::vector<PriorKernelEstimate> prior_covariance_study(const std::vector<KernelStudyCase>& cases,
                                                        const Vector& grid, long n_samples, std::uint64_t seed,
                                                        const std::filesystem::path& out_dir = {});

// max_ij |A_ij - B_ij| / sqrt(se_A^2 + se_B^2).
double max_standardized_difference(const PriorKernelEstimate& a, const PriorKernelEstimate& b);

}  // namespace bpinn
