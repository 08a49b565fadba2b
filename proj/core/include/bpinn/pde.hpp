#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bpinn/surrogate.hpp"

namespace bpinn {

// Axis-aligned box [lower, upper].
struct Box {
  Vector lower;
  Vector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::Ref<const Vector>& x, double tol = 0.0) const;
  bool on_boundary(const Eigen::Ref<const Vector>& x, double tol = 1e-12) const;
};

// A PDE coefficient. Unknown parameters are inferred and carry a Gaussian
// prior; known ones are fixed at `value`.
struct ParamDecl {
  std::string name;
  double value = 0.0;  // known value, or the truth used to synthesise data
  bool unknown = false;
  double prior_mean = 0.0;
  double prior_std = 1.0;
};

using ParamSet = std::map<std::string, double>;

// f~ and its partial derivatives with respect to the jet entries and to
// every declared parameter (declaration order).
struct ResidualEval {
  double f = 0.0;
  double d_value = 0.0;
  Vector d_grad;
  Vector d_hess;
  Vector d_params;
};

// N_x(u; lambda) = f in D,  u = b on the boundary (Dirichlet trace).
class PdeProblem {
 public:
  virtual ~PdeProblem() = default;

  virtual const std::string& name() const = 0;
  virtual int dim() const = 0;
  virtual const Box& domain() const = 0;
  virtual const std::vector<ParamDecl>& params() const = 0;
  virtual bool has_residual() const = 0;

  // Positional parameter evaluation; `param_values` follows params().
  virtual ResidualEval residual(const Jet& jet, std::span<const double> param_values) const = 0;

  virtual Jet exact_jet(const Eigen::Ref<const Vector>& x) const = 0;
  virtual double exact_f(const Eigen::Ref<const Vector>& x) const = 0;

  // Names of parameters with unknown == true, in declaration order.
  std::vector<std::string> unknown_names() const;
  int unknown_count() const;
  // Declared values of all parameters (known values and truths).
  std::vector<double> true_values() const;
  // Maps a named set onto declaration order; ConfigError on missing names.
  std::vector<double> resolve(const ParamSet& params) const;
};

using ProblemPtr = std::shared_ptr<const PdeProblem>;

// Catalog: regression, poisson1d, nonlinear_poisson1d, allen_cahn2d,
// inverse_reaction1d, inverse_reaction2d. Throws UsageError otherwise.
ProblemPtr make_problem(const std::string& name);
std::vector<std::string> problem_names();

// f~ at one point; ConfigError when a parameter is missing or the problem has
// no differential operator.
double residual(const PdeProblem& problem, const Jet& jet, const ParamSet& params);

// Dirichlet trace.
inline double boundary(const Jet& jet) { return jet.value; }

enum class Quantity { kU, kF };

// Closed-form reference value. DomainError outside the domain.
double exact_eval(const PdeProblem& problem, Quantity which, const Eigen::Ref<const Vector>& x);

}  // namespace bpinn
