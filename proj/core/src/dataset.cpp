#include "bpinn/dataset.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "bpinn/errors.hpp"

namespace bpinn {

ObservationSet ObservationSet::empty_set(int dim) {
  ObservationSet s;
  s.points.resize(dim, 0);
  return s;
}

void ObservationSet::append(const Eigen::Ref<const Vector>& point, double value, double sigma) {
  if (points.rows() != point.size()) {
    if (size() != 0) throw DimensionError("observation dimension mismatch");
    points.resize(point.size(), 0);
  }
  const Eigen::Index n = size();
  points.conservativeResize(Eigen::NoChange, n + 1);
  points.col(n) = point;
  values.conservativeResize(n + 1);
  values[n] = value;
  sigmas.conservativeResize(n + 1);
  sigmas[n] = sigma;
}

SensorDataset::SensorDataset(int dim_)
    : dim(dim_),
      u(ObservationSet::empty_set(dim_)),
      f(ObservationSet::empty_set(dim_)),
      b(ObservationSet::empty_set(dim_)) {}

void SensorDataset::validate(const PdeProblem& problem) const {
  if (dim != problem.dim()) throw ConfigError("dataset dimension does not match the problem");
  auto check = [&](const ObservationSet& s, const char* label, bool boundary) {
    if (s.points.cols() != s.size() || s.sigmas.size() != s.size())
      throw ConfigError(std::string(label) + " observations are inconsistent");
    if (s.size() > 0 && s.points.rows() != dim)
      throw ConfigError(std::string(label) + " observations have the wrong dimension");
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (!(s.sigmas[i] > 0.0)) throw ConfigError(std::string(label) + " noise std must be positive");
      const Vector x = s.points.col(i);
      if (boundary ? !problem.domain().on_boundary(x) : !problem.domain().contains(x, 1e-12))
        throw ConfigError(std::string(label) + " sensor " + std::to_string(i) +
                          (boundary ? " is not on the boundary" : " lies outside the domain"));
    }
  };
  check(u, "u", false);
  check(f, "f", false);
  check(b, "b", true);
  if (!problem.has_residual() && !f.empty())
    throw ConfigError("problem '" + problem.name() + "' has no operator but f data was given");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(const SensorDataset& data, std::ostream& out) {
  out << "set,x";
  if (data.dim == 2) out << ",y";
  out << ",value,sigma\n";
  auto dump = [&](const ObservationSet& s, const char* label) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      out << label;
      for (int d = 0; d < data.dim; ++d) out << ',' << format_double(s.points(d, i));
      out << ',' << format_double(s.values[i]) << ',' << format_double(s.sigmas[i]) << '\n';
    }
  };
  dump(data.u, "u");
  dump(data.f, "f");
  dump(data.b, "b");
}

SensorDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty dataset CSV");
  int dim = 0;
  if (line == "set,x,value,sigma") dim = 1;
  else if (line == "set,x,y,value,sigma") dim = 2;
  else throw ConfigError("unrecognised dataset CSV header: " + line);

  SensorDataset data(dim);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != dim + 3) throw ConfigError("malformed dataset row: " + line);
    Vector x(dim);
    for (int d = 0; d < dim; ++d) x[d] = std::stod(cells[1 + d]);
    const double value = std::stod(cells[1 + dim]);
    const double sigma = std::stod(cells[2 + dim]);
    if (cells[0] == "u") data.u.append(x, value, sigma);
    else if (cells[0] == "f") data.f.append(x, value, sigma);
    else if (cells[0] == "b") data.b.append(x, value, sigma);
    else throw ConfigError("unknown observation set '" + cells[0] + "'");
  }
  return data;
}

}  // namespace bpinn
