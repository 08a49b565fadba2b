// bpinn: run experiments and prior studies from the command line.
//
// Exit status: 0 success, 2 configuration or usage error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bpinn/datagen.hpp"
#include "bpinn/errors.hpp"
#include "bpinn/experiments.hpp"
#include "bpinn/studies.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bpinn::ConfigError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void print_summary(const bpinn::RunSummary& s) {
  std::cout << "experiment  " << s.experiment << " (" << s.surrogate << "+" << s.estimator << ", noise "
            << s.noise << ", seed " << s.seed << ")\n";
  if (s.k_mean) std::cout << "k           " << *s.k_mean << " +/- " << s.k_std.value_or(0.0) << "\n";
  std::cout << "rel_l2_u    " << s.rel_l2_u << "\n";
  if (s.rel_l2_f) std::cout << "rel_l2_f    " << *s.rel_l2_f << "\n";
  std::cout << "mean_std_u  " << s.mean_std_u << "\n";
  std::cout << "wall time   " << s.wall_time_seconds << " s\n";
  std::cout << "output      " << s.output_dir.string() << "\n";
}

int run(const std::string& config_path) {
  const bpinn::ExperimentConfig config = bpinn::config_from_json(read_file(config_path));
  print_summary(bpinn::run_experiment(config));
  return 0;
}

int list() {
  std::cout << "experiments (noise levels):\n";
  for (const auto& name : bpinn::problem_names()) {
    std::cout << "  " << name << " (";
    const auto levels = bpinn::experiment_noise_levels(name);
    for (std::size_t i = 0; i < levels.size(); ++i) std::cout << (i ? ", " : "") << levels[i];
    std::cout << ")\n";
  }
  std::cout << "surrogates:";
  for (const auto& s : bpinn::surrogate_names()) std::cout << ' ' << s;
  std::cout << "\nestimators:";
  for (const auto& e : bpinn::estimator_names()) std::cout << ' ' << e;
  std::cout << "\nprofiles: desk paper\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian physics-informed inference engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bpinn::engine_version()));

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run_cmd->add_option("config", config_path, "Path to the config JSON")->required();

  auto* list_cmd = app.add_subcommand("list", "List catalog experiments, surrogates and estimators");

  bpinn::DensityStudyConfig density;
  std::vector<int> density_widths{50, 50};
  std::string density_out = "prior_density";
  auto* density_cmd = app.add_subcommand("prior-density", "Histogram prior marginals of u, du/dx, d2u/dx2");
  density_cmd->add_option("--widths", density_widths, "Hidden layer widths")->expected(1, -1);
  density_cmd->add_option("--sigma-w", density.sigma_w, "Weight prior std (one value or one per layer)")->expected(1, -1);
  density_cmd->add_option("--sigma-b", density.sigma_b, "Bias prior std (one value or one per layer)")->expected(1, -1);
  density_cmd->add_option("--points", density.points, "Evaluation points")->expected(1, -1);
  density_cmd->add_option("--samples", density.n_samples, "Prior draws")->check(CLI::PositiveNumber);
  density_cmd->add_option("--bins", density.bins, "Histogram bins")->check(CLI::PositiveNumber);
  density_cmd->add_option("--seed", density.seed, "Seed");
  density_cmd->add_option("--out", density_out, "Output directory (under the output root when relative)");

  long cov_samples = 100000;
  int cov_grid = 41;
  std::uint64_t cov_seed = 0;
  std::vector<std::string> cov_cases{"a", "b", "c", "d", "e"};
  std::string cov_out = "prior_cov";
  auto* cov_cmd = app.add_subcommand("prior-cov", "Monte-Carlo prior covariance kernels of the reference settings");
  cov_cmd->add_option("--samples", cov_samples, "Prior draws per setting")->check(CLI::PositiveNumber);
  cov_cmd->add_option("--grid", cov_grid, "Grid points on [-1, 1]")->check(CLI::Range(2, 100000));
  cov_cmd->add_option("--seed", cov_seed, "Seed");
  cov_cmd->add_option("--cases", cov_cases, "Subset of settings a-e")->expected(1, -1);
  cov_cmd->add_option("--out", cov_out, "Output directory (under the output root when relative)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  auto under_root = [](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : bpinn::output_root() / path;
  };

  try {
    if (*run_cmd) return run(config_path);
    if (*list_cmd) return list();
    if (*density_cmd) {
      density.arch = bpinn::MlpArchitecture{1, density_widths};
      const auto dir = under_root(density_out);
      for (const auto& s : bpinn::prior_density_study(density, dir))
        std::cout << s.quantity << "(x=" << s.x << "): std " << s.stddev << ", excess kurtosis "
                  << s.excess_kurtosis << " (Gaussian 3-SE band +/-" << 3.0 * s.kurtosis_se << ")\n";
      std::cout << "histograms written to " << dir.string() << "\n";
      return 0;
    }
    if (*cov_cmd) {
      std::vector<bpinn::KernelStudyCase> chosen;
      for (const auto& label : cov_cases) {
        bool found = false;
        for (const auto& c : bpinn::reference_kernel_cases())
          if (c.label == label) {
            chosen.push_back(c);
            found = true;
          }
        if (!found) throw bpinn::UsageError("unknown covariance setting '" + label + "' (available: a b c d e)");
      }
      const bpinn::Vector grid = bpinn::Vector::LinSpaced(cov_grid, -1.0, 1.0);
      const auto dir = under_root(cov_out);
      bpinn::prior_covariance_study(chosen, grid, cov_samples, cov_seed, dir);
      std::cout << "covariance matrices written to " << dir.string() << "\n";
      return 0;
    }
  } catch (const bpinn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bpinn::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bpinn::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bpinn::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
