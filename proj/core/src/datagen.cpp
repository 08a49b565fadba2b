#include "bpinn/datagen.hpp"

#include <cmath>
#include <string>

#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

ObservationSet& target_set(SensorDataset& data, SensorSet set) {
  switch (set) {
    case SensorSet::kU: return data.u;
    case SensorSet::kF: return data.f;
    case SensorSet::kB: return data.b;
  }
  throw ConfigError("unknown sensor set");
}

Matrix equidistant_points(double lower, double upper, int count) {
  Matrix p(1, count);
  if (count == 1) {
    p(0, 0) = 0.5 * (lower + upper);
    return p;
  }
  const double h = (upper - lower) / (count - 1);
  for (int i = 0; i < count; ++i) p(0, i) = lower + i * h;
  p(0, count - 1) = upper;
  return p;
}

}  // namespace

SensorLayout SensorLayout::equidistant(SensorSet set, int count, double lower, double upper) {
  SensorLayout l;
  l.kind = Kind::kEquidistant1d;
  l.sets = {set};
  l.count = count;
  l.lower = lower;
  l.upper = upper;
  return l;
}

SensorLayout SensorLayout::random_interior(std::vector<SensorSet> sets, int count) {
  SensorLayout l;
  l.kind = Kind::kUniformRandomInterior;
  l.sets = std::move(sets);
  l.count = count;
  return l;
}

SensorLayout SensorLayout::boundary_grid(SensorSet set, int per_edge) {
  SensorLayout l;
  l.kind = Kind::kBoundaryGrid;
  l.sets = {set};
  l.count = per_edge;
  return l;
}

SensorLayout SensorLayout::explicit_list(SensorSet set, Matrix points) {
  SensorLayout l;
  l.kind = Kind::kExplicitList;
  l.sets = {set};
  l.count = static_cast<int>(points.cols());
  l.points = std::move(points);
  return l;
}

double NoiseSpec::of(SensorSet set) const {
  switch (set) {
    case SensorSet::kU: return sigma_u;
    case SensorSet::kF: return sigma_f;
    case SensorSet::kB: return sigma_b;
  }
  return 0.0;
}

Matrix layout_points(const PdeProblem& problem, const SensorLayout& layout, Rng& placement) {
  const Box& box = problem.domain();
  const int dim = problem.dim();
  if (layout.count < 1) throw ConfigError("sensor layouts need a positive count");
  if (layout.sets.empty()) throw ConfigError("sensor layout does not name a set");

  switch (layout.kind) {
    case SensorLayout::Kind::kEquidistant1d: {
      if (dim != 1) throw ConfigError("equidistant layouts are one-dimensional");
      double lo = layout.lower, hi = layout.upper;
      if (lo == hi) {
        lo = box.lower[0];
        hi = box.upper[0];
      }
      if (lo > hi || lo < box.lower[0] || hi > box.upper[0])
        throw ConfigError("equidistant interval lies outside the domain");
      return equidistant_points(lo, hi, layout.count);
    }
    case SensorLayout::Kind::kUniformRandomInterior: {
      Matrix p(dim, layout.count);
      for (int j = 0; j < layout.count; ++j)
        for (int i = 0; i < dim; ++i)
          p(i, j) = box.lower[i] + (box.upper[i] - box.lower[i]) * placement.uniform();
      return p;
    }
    case SensorLayout::Kind::kBoundaryGrid: {
      if (dim == 1) {
        Matrix p(1, 2);
        p << box.lower[0], box.upper[0];
        return p;
      }
      if (dim != 2) throw ConfigError("boundary grids support one or two dimensions");
      const int n = layout.count;
      if (n < 2) throw ConfigError("boundary grids need at least two points per edge");
      Matrix p(2, 4 * n);
      const Matrix xs = equidistant_points(box.lower[0], box.upper[0], n);
      const Matrix ys = equidistant_points(box.lower[1], box.upper[1], n);
      for (int j = 0; j < n; ++j) {
        p.col(j) << xs(0, j), box.lower[1];          // bottom
        p.col(n + j) << box.upper[0], ys(0, j);      // right
        p.col(2 * n + j) << xs(0, j), box.upper[1];  // top
        p.col(3 * n + j) << box.lower[0], ys(0, j);  // left
      }
      return p;
    }
    case SensorLayout::Kind::kExplicitList:
      if (layout.points.rows() != dim) throw ConfigError("explicit sensor list has the wrong dimension");
      return layout.points;
  }
  throw ConfigError("unknown layout kind");
}

SensorDataset generate_sensors(const PdeProblem& problem, const std::vector<SensorLayout>& layouts,
                               const NoiseSpec& noise, std::uint64_t seed) {
  if (noise.sigma_u < 0.0 || noise.sigma_f < 0.0 || noise.sigma_b < 0.0)
    throw ConfigError("noise standard deviations must be non-negative");
  Rng placement(seed, RngStream::kSensorPlacement);
  Rng noise_rng(seed, RngStream::kSensorNoise);
  SensorDataset data(problem.dim());
  const Box& box = problem.domain();

  for (const SensorLayout& layout : layouts) {
    const Matrix pts = layout_points(problem, layout, placement);
    for (SensorSet set : layout.sets) {
      if (set == SensorSet::kF && !problem.has_residual())
        throw ConfigError("problem '" + problem.name() + "' has no f to observe");
      const double sigma = noise.of(set);
      for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        const auto x = pts.col(j);
        if (set == SensorSet::kB ? !box.on_boundary(x) : !box.contains(x))
          throw ConfigError("sensor location does not fit the problem domain");
        const double exact = exact_eval(problem, set == SensorSet::kF ? Quantity::kF : Quantity::kU, x);
        const double eps = noise_rng.normal();
        target_set(data, set).append(x, exact + sigma * eps, sigma);
      }
    }
  }
  return data;
}

DatasetSpec experiment_dataset_spec(const std::string& experiment, double noise_level) {
  if (!(noise_level >= 0.0)) throw ConfigError("noise level must be non-negative");
  DatasetSpec spec;
  auto& L = spec.layouts;
  if (experiment == "regression") {
    L.push_back(SensorLayout::equidistant(SensorSet::kU, 16, -0.8, -0.2));
    L.push_back(SensorLayout::equidistant(SensorSet::kU, 16, 0.2, 0.8));
    spec.noise = {noise_level, 0.0, 0.0};
  } else if (experiment == "poisson1d" || experiment == "nonlinear_poisson1d") {
    L.push_back(SensorLayout::equidistant(SensorSet::kF, experiment == "poisson1d" ? 16 : 32, -0.7, 0.7));
    L.push_back(SensorLayout::boundary_grid(SensorSet::kB, 1));
    spec.noise = {0.0, noise_level, noise_level};
  } else if (experiment == "allen_cahn2d") {
    L.push_back(SensorLayout::random_interior({SensorSet::kF}, 500));
    L.push_back(SensorLayout::boundary_grid(SensorSet::kB, 25));
    spec.noise = {0.0, noise_level, noise_level};
  } else if (experiment == "inverse_reaction1d") {
    L.push_back(SensorLayout::equidistant(SensorSet::kF, 32, -0.7, 0.7));
    L.push_back(SensorLayout::boundary_grid(SensorSet::kB, 1));
    // The six interior nodes of an 8-point equipartition of [-0.7, 0.7].
    L.push_back(SensorLayout::explicit_list(SensorSet::kU, equidistant_points(-0.7, 0.7, 8).middleCols(1, 6)));
    spec.noise = {noise_level, noise_level, 0.01};
  } else if (experiment == "inverse_reaction2d") {
    L.push_back(SensorLayout::random_interior({SensorSet::kU, SensorSet::kF}, 100));
    L.push_back(SensorLayout::boundary_grid(SensorSet::kB, 25));
    spec.noise = {noise_level, noise_level, 0.01};
  } else {
    throw UsageError("no dataset for experiment '" + experiment + "'");
  }
  return spec;
}

std::vector<double> experiment_noise_levels(const std::string& experiment) {
  if (experiment == "regression") return {0.1};
  experiment_dataset_spec(experiment, 0.01);
  return {0.01, 0.1};
}

SensorDataset experiment_dataset(const PdeProblem& problem, double noise_level, std::uint64_t seed) {
  const DatasetSpec spec = experiment_dataset_spec(problem.name(), noise_level);
  return generate_sensors(problem, spec.layouts, spec.noise, seed);
}

}  // namespace bpinn
