#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bpinn/baselines.hpp"
#include "bpinn/flow.hpp"
#include "bpinn/hmc.hpp"
#include "bpinn/vi.hpp"

namespace bpinn {

const char* engine_version();

// Everything a run needs. Defaults come from a settings profile ("paper" or
// "desk"); a JSON document may override any field.
struct ExperimentConfig {
  std::string experiment;
  std::string surrogate = "bnn";  // bnn | kl
  std::string estimator = "hmc";  // hmc | vi | dnf | dropout | pinn | gpr
  std::string profile = "desk";
  double noise = 0.01;
  std::uint64_t seed = 0;          // estimator randomness
  std::uint64_t data_seed = 2020;  // sensor placement and noise

  std::vector<int> hidden_widths{50, 50};
  int kl_terms = 20;
  double kl_corr_length = 0.25;

  HmcConfig hmc;
  ViConfig vi;
  double vi_init_rho = -3.0;
  FlowConfig flow;
  DropoutConfig dropout;
  PinnConfig pinn;
  long gpr_prior_samples = 100000;

  int predictive_draws = 10000;  // posterior draws used for predictions (most recent kept)
  int grid_points_1d = 201;
  int grid_points_2d = 101;
  std::string output_dir;  // relative paths resolve against the output root

  // Propagates `seed` into every estimator config.
  void apply_seed();
  // Throws UsageError for unknown names, ConfigError for bad pairings.
  void validate() const;
};

// Defaults for `experiment` under `profile`. UsageError on unknown names.
ExperimentConfig default_config(const std::string& experiment, const std::string& profile = "desk",
                                std::optional<double> noise = std::nullopt);

// Parses a JSON document: profile defaults first, then overrides.
ExperimentConfig config_from_json(const std::string& text);
// Canonical JSON echo (output_dir omitted so echoes compare across locations).
std::string config_to_json(const ExperimentConfig& config);

std::vector<std::string> estimator_names();
std::vector<std::string> surrogate_names();

// $BPINN_OUTPUT_ROOT, or "runs" when unset.
std::filesystem::path output_root();
// Where a config writes: output_dir (absolute, or under output_root), else a
// name derived from experiment, surrogate, estimator, noise and seed.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

struct RunSummary {
  std::string experiment, surrogate, estimator;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> k_mean, k_std;
  double rel_l2_u = 0.0;
  std::optional<double> rel_l2_f;
  double mean_std_u = 0.0;
  std::optional<double> mean_std_f;
  double coverage_u = 0.0;  // fraction of grid points with |mean - exact| <= 3 std
  std::map<std::string, double> diagnostics;
  double wall_time_seconds = 0.0;
  std::filesystem::path output_dir;
  std::string summary_json;  // exact bytes written to summary.json
};

// Runs one experiment and writes prediction_u.csv, prediction_f.csv (when the
// problem has an operator), summary.json and diagnostics.json.
RunSummary run_experiment(const ExperimentConfig& config);

// Evaluation grid over the problem domain (dim x N); 2-D grids run x fastest.
Matrix evaluation_grid(const PdeProblem& problem, const ExperimentConfig& config);

// ||mean - exact|| / ||exact||.
double relative_l2(const Vector& mean, const Vector& exact);

}  // namespace bpinn
