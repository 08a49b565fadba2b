#include "bpinn/pde.hpp"

#include <cmath>
#include <numbers>

#include "bpinn/errors.hpp"

namespace bpinn {

bool Box::contains(const Eigen::Ref<const Vector>& x, double tol) const {
  if (x.size() != lower.size()) return false;
  return ((x.array() >= lower.array() - tol) && (x.array() <= upper.array() + tol)).all();
}

bool Box::on_boundary(const Eigen::Ref<const Vector>& x, double tol) const {
  if (!contains(x, tol)) return false;
  return ((x - lower).array().abs() <= tol).any() || ((x - upper).array().abs() <= tol).any();
}

std::vector<std::string> PdeProblem::unknown_names() const {
  std::vector<std::string> names;
  for (const auto& p : params())
    if (p.unknown) names.push_back(p.name);
  return names;
}

int PdeProblem::unknown_count() const { return static_cast<int>(unknown_names().size()); }

std::vector<double> PdeProblem::true_values() const {
  std::vector<double> v;
  for (const auto& p : params()) v.push_back(p.value);
  return v;
}

std::vector<double> PdeProblem::resolve(const ParamSet& set) const {
  std::vector<double> v;
  for (const auto& p : params()) {
    auto it = set.find(p.name);
    if (it == set.end())
      throw ConfigError("problem '" + name() + "' needs parameter '" + p.name + "'");
    v.push_back(it->second);
  }
  return v;
}

namespace {

constexpr double kPi = std::numbers::pi;

enum class Reaction { kNone, kLinear, kTanh, kAllenCahn, kQuadratic };
enum class Solution { kSinCubed, kSinSin };

// lambda * Laplacian(u) + r(u; k) = f, with a manufactured solution.
class DiffusionReaction final : public PdeProblem {
 public:
  DiffusionReaction(std::string name, Box domain, Reaction reaction, Solution solution,
                    std::vector<ParamDecl> params)
      : name_(std::move(name)),
        domain_(std::move(domain)),
        reaction_(reaction),
        solution_(solution),
        params_(std::move(params)) {}

  const std::string& name() const override { return name_; }
  int dim() const override { return domain_.dim(); }
  const Box& domain() const override { return domain_; }
  const std::vector<ParamDecl>& params() const override { return params_; }
  bool has_residual() const override { return reaction_ != Reaction::kNone; }

  ResidualEval residual(const Jet& jet, std::span<const double> p) const override {
    if (!has_residual()) throw ConfigError("problem '" + name_ + "' has no differential operator");
    if (p.size() != params_.size()) throw ConfigError("parameter count mismatch for '" + name_ + "'");
    if (jet.hess_diag.size() != dim()) throw DimensionError("jet dimension does not match problem");
    const double lambda = p[0];
    const double laplacian = jet.hess_diag.sum();
    const double u = jet.value;

    ResidualEval r;
    r.d_grad = Vector::Zero(dim());
    r.d_hess = Vector::Constant(dim(), lambda);
    r.d_params = Vector::Zero(static_cast<Eigen::Index>(p.size()));
    r.d_params[0] = laplacian;
    r.f = lambda * laplacian;
    switch (reaction_) {
      case Reaction::kNone:
      case Reaction::kLinear:
        break;
      case Reaction::kTanh: {
        const double k = p[1];
        const double t = std::tanh(u);
        r.f += k * t;
        r.d_value = k * (1.0 - t * t);
        r.d_params[1] = t;
        break;
      }
      case Reaction::kAllenCahn:
        r.f += u * (u * u - 1.0);
        r.d_value = 3.0 * u * u - 1.0;
        break;
      case Reaction::kQuadratic: {
        const double k = p[1];
        r.f += k * u * u;
        r.d_value = 2.0 * k * u;
        r.d_params[1] = u * u;
        break;
      }
    }
    return r;
  }

  Jet exact_jet(const Eigen::Ref<const Vector>& x) const override {
    Jet jet;
    jet.grad.resize(dim());
    jet.hess_diag.resize(dim());
    if (solution_ == Solution::kSinCubed) {
      const double s = std::sin(6.0 * x[0]), c = std::cos(6.0 * x[0]);
      jet.value = s * s * s;
      jet.grad[0] = 18.0 * s * s * c;
      jet.hess_diag[0] = 216.0 * s * c * c - 108.0 * s * s * s;
    } else {
      const double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
      const double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
      jet.value = sx * sy;
      jet.grad << kPi * cx * sy, kPi * sx * cy;
      jet.hess_diag.setConstant(-kPi * kPi * sx * sy);
    }
    return jet;
  }

  double exact_f(const Eigen::Ref<const Vector>& x) const override {
    if (!has_residual()) throw ConfigError("problem '" + name_ + "' has no forcing term");
    const double lambda = params_[0].value;
    if (solution_ == Solution::kSinCubed) {
      const double s = std::sin(6.0 * x[0]), c = std::cos(6.0 * x[0]);
      const double f = lambda * (216.0 * s * c * c - 108.0 * s * s * s);
      if (reaction_ == Reaction::kTanh) return f + params_[1].value * std::tanh(s * s * s);
      return f;
    }
    const double u = std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    const double f = -2.0 * kPi * kPi * lambda * u;
    if (reaction_ == Reaction::kAllenCahn) return f + u * (u * u - 1.0);
    return f + params_[1].value * u * u;
  }

 private:
  std::string name_;
  Box domain_;
  Reaction reaction_;
  Solution solution_;
  std::vector<ParamDecl> params_;
};

Box interval(double lo, double hi) {
  Box b;
  b.lower = Vector::Constant(1, lo);
  b.upper = Vector::Constant(1, hi);
  return b;
}

Box square(double lo, double hi) {
  Box b;
  b.lower = Vector::Constant(2, lo);
  b.upper = Vector::Constant(2, hi);
  return b;
}

ParamDecl known(const char* name, double value) { return {name, value, false, 0.0, 1.0}; }
ParamDecl unknown(const char* name, double truth) { return {name, truth, true, 0.0, 1.0}; }

}  // namespace

std::vector<std::string> problem_names() {
  return {"regression",   "poisson1d",          "nonlinear_poisson1d",
          "allen_cahn2d", "inverse_reaction1d", "inverse_reaction2d"};
}

ProblemPtr make_problem(const std::string& name) {
  if (name == "regression")
    return std::make_shared<DiffusionReaction>(name, interval(-1.0, 1.0), Reaction::kNone,
                                               Solution::kSinCubed, std::vector<ParamDecl>{});
  if (name == "poisson1d")
    return std::make_shared<DiffusionReaction>(name, interval(-0.7, 0.7), Reaction::kLinear,
                                               Solution::kSinCubed,
                                               std::vector{known("lambda", 0.01)});
  if (name == "nonlinear_poisson1d")
    return std::make_shared<DiffusionReaction>(
        name, interval(-0.7, 0.7), Reaction::kTanh, Solution::kSinCubed,
        std::vector{known("lambda", 0.01), known("k", 0.7)});
  if (name == "allen_cahn2d")
    return std::make_shared<DiffusionReaction>(name, square(-1.0, 1.0), Reaction::kAllenCahn,
                                               Solution::kSinSin,
                                               std::vector{known("lambda", 0.01)});
  if (name == "inverse_reaction1d")
    return std::make_shared<DiffusionReaction>(
        name, interval(-0.7, 0.7), Reaction::kTanh, Solution::kSinCubed,
        std::vector{known("lambda", 0.01), unknown("k", 0.7)});
  if (name == "inverse_reaction2d")
    return std::make_shared<DiffusionReaction>(
        name, square(-1.0, 1.0), Reaction::kQuadratic, Solution::kSinSin,
        std::vector{known("lambda", 0.01), unknown("k", 1.0)});
  std::string listing;
  for (const auto& n : problem_names()) listing += " " + n;
  throw UsageError("unknown problem '" + name + "'; available:" + listing);
}

double residual(const PdeProblem& problem, const Jet& jet, const ParamSet& params) {
  const auto values = problem.resolve(params);
  return problem.residual(jet, values).f;
}

double exact_eval(const PdeProblem& problem, Quantity which, const Eigen::Ref<const Vector>& x) {
  if (x.size() != problem.dim()) throw DimensionError("point dimension does not match problem");
  if (!problem.domain().contains(x, 1e-12)) throw DomainError("point outside the problem domain");
  return which == Quantity::kU ? problem.exact_jet(x).value : problem.exact_f(x);
}

}  // namespace bpinn
