#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpinn/dataset.hpp"

namespace bpinn {

class Rng;

enum class SensorSet { kU, kF, kB };

// Where sensors go. A layout places its points once and records an
// observation in every set listed in `sets`, so u and f can share locations.
struct SensorLayout {
  enum class Kind { kEquidistant1d, kUniformRandomInterior, kBoundaryGrid, kExplicitList };

  Kind kind = Kind::kEquidistant1d;
  std::vector<SensorSet> sets;
  int count = 1;       // points, or points per edge for kBoundaryGrid
  double lower = 0.0;  // interval for kEquidistant1d; defaults to the domain when lower == upper
  double upper = 0.0;
  Matrix points;       // kExplicitList, dim x N

  static SensorLayout equidistant(SensorSet set, int count, double lower, double upper);
  static SensorLayout random_interior(std::vector<SensorSet> sets, int count);
  static SensorLayout boundary_grid(SensorSet set, int per_edge);
  static SensorLayout explicit_list(SensorSet set, Matrix points);
};

// Per-set noise standard deviations; 0 is allowed and yields exact values.
struct NoiseSpec {
  double sigma_u = 0.0;
  double sigma_f = 0.0;
  double sigma_b = 0.0;

  double of(SensorSet set) const;
};

// Places sensors, evaluates the exact solution and adds seeded Gaussian noise.
// Throws ConfigError when a layout does not fit the problem's domain.
SensorDataset generate_sensors(const PdeProblem& problem, const std::vector<SensorLayout>& layouts,
                               const NoiseSpec& noise, std::uint64_t seed);

// Points of one layout, without observations (dim x N).
Matrix layout_points(const PdeProblem& problem, const SensorLayout& layout, Rng& placement);

// Sensor layouts and noise of a catalog experiment. `noise_level` selects the
// noise case (0.01 or 0.1; the regression task always uses 0.1 on u).
struct DatasetSpec {
  std::vector<SensorLayout> layouts;
  NoiseSpec noise;
};
DatasetSpec experiment_dataset_spec(const std::string& experiment, double noise_level);
std::vector<double> experiment_noise_levels(const std::string& experiment);

SensorDataset experiment_dataset(const PdeProblem& problem, double noise_level, std::uint64_t seed);

}  // namespace bpinn
