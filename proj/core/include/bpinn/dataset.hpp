#pragma once

#include <iosfwd>
#include <string>

#include "bpinn/pde.hpp"

namespace bpinn {

// Noisy observations of one quantity: locations (dim x N), values, and the
// known noise standard deviation of every sensor.
struct ObservationSet {
  Matrix points;
  Vector values;
  Vector sigmas;

  Eigen::Index size() const { return values.size(); }
  bool empty() const { return size() == 0; }

  static ObservationSet empty_set(int dim);
  void append(const Eigen::Ref<const Vector>& point, double value, double sigma);
};

// D = D_u + D_f + D_b.
struct SensorDataset {
  int dim = 1;
  ObservationSet u;
  ObservationSet f;
  ObservationSet b;

  explicit SensorDataset(int dim_ = 1);

  Eigen::Index total() const { return u.size() + f.size() + b.size(); }

  // Throws ConfigError: sigma <= 0, u/f outside the domain, b off the
  // boundary, or f data for a problem without an operator.
  void validate(const PdeProblem& problem) const;
};

// CSV with header `set,x[,y],value,sigma`; floats printed with 17
// significant digits so a round trip is exact.
void write_dataset_csv(const SensorDataset& data, std::ostream& out);
SensorDataset read_dataset_csv(std::istream& in);

// Shortest-round-trip-safe decimal formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace bpinn
