#include "bpinn/posterior.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bpinn/errors.hpp"
#include "bpinn/rng.hpp"

namespace bpinn {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

}  // namespace

Vector LogDensity::initial_state(Rng& rng) const { return rng.normal_vector(dim()); }

LogPosteriorTarget::LogPosteriorTarget(ProblemPtr problem,
                                       std::shared_ptr<const Surrogate> surrogate,
                                       std::shared_ptr<const SensorDataset> data,
                                       InferenceMode mode, Vector prior_std)
    : problem_(std::move(problem)),
      surrogate_(std::move(surrogate)),
      data_(std::move(data)),
      mode_(mode) {
  if (!problem_ || !surrogate_ || !data_) throw ConfigError("target needs problem, surrogate and data");
  if (surrogate_->input_dim() != problem_->dim())
    throw ConfigError("surrogate input dimension does not match the problem");
  data_->validate(*problem_);

  const auto& decls = problem_->params();
  for (int i = 0; i < static_cast<int>(decls.size()); ++i)
    if (decls[i].unknown) unknown_slots_.push_back(i);
  if (mode_ == InferenceMode::kInverse && unknown_slots_.empty())
    throw ConfigError("inverse mode needs a problem with unknown parameters");
  if (mode_ == InferenceMode::kForward && !unknown_slots_.empty())
    throw ConfigError("forward mode needs a problem without unknown parameters");
  unknown_count_ = static_cast<int>(unknown_slots_.size());

  const int ns = surrogate_->param_count();
  prior_std_ = Vector::Ones(ns + unknown_count_);
  prior_mean_ = Vector::Zero(ns + unknown_count_);
  if (prior_std.size() != 0) {
    if (prior_std.size() != ns) throw DimensionError("prior std must cover the surrogate block");
    if (!(prior_std.array() > 0.0).all()) throw ConfigError("prior std must be positive");
    prior_std_.head(ns) = prior_std;
  }
  for (int j = 0; j < unknown_count_; ++j) {
    prior_std_[ns + j] = decls[unknown_slots_[j]].prior_std;
    prior_mean_[ns + j] = decls[unknown_slots_[j]].prior_mean;
  }
}

Vector LogPosteriorTarget::initial_state(Rng& rng) const {
  Vector theta = rng.normal_vector(dim());
  return prior_mean_ + prior_std_.cwiseProduct(theta);
}

std::vector<double> LogPosteriorTarget::pde_params(const Vector& theta) const {
  std::vector<double> values = problem_->true_values();
  const int ns = surrogate_->param_count();
  for (int j = 0; j < unknown_count_; ++j) values[unknown_slots_[j]] = theta[ns + j];
  return values;
}

double LogPosteriorTarget::likelihood_terms(const Vector& theta, Vector* grad, bool use_u,
                                            bool use_f, bool use_b) const {
  if (theta.size() != dim())
    throw DimensionError("theta has length " + std::to_string(theta.size()) + ", target expects " +
                         std::to_string(dim()));
  const int ns = surrogate_->param_count();
  const auto theta_s = theta.head(ns);
  const auto params = pde_params(theta);
  if (grad) grad->setZero(dim());

  double total = 0.0;
  const SensorDataset& d = *data_;

  if (use_f && !d.f.empty()) {
    auto tape = surrogate_->record(theta_s, d.f.points, JetOrder::kSecond);
    const JetBatch& jets = tape->jets();
    JetBatch adjoint = JetBatch::zeros(d.f.size(), problem_->dim(), JetOrder::kSecond);
    for (Eigen::Index j = 0; j < d.f.size(); ++j) {
      const ResidualEval r = problem_->residual(jets.at(j), params);
      const double s2 = d.f.sigmas[j] * d.f.sigmas[j];
      const double res = r.f - d.f.values[j];
      total += -0.5 * (kLog2Pi + std::log(s2)) - res * res / (2.0 * s2);
      if (grad) {
        const double w = -res / s2;
        adjoint.value[j] = w * r.d_value;
        adjoint.grad.col(j) = w * r.d_grad;
        adjoint.hess.col(j) = w * r.d_hess;
        for (int k = 0; k < unknown_count_; ++k) (*grad)[ns + k] += w * r.d_params[unknown_slots_[k]];
      }
    }
    if (grad) tape->pullback(adjoint, grad->head(ns));
  }

  const Eigen::Index nu = use_u ? d.u.size() : 0;
  const Eigen::Index nb = use_b ? d.b.size() : 0;
  if (nu + nb > 0) {
    Matrix points(problem_->dim(), nu + nb);
    Vector values(nu + nb), sigmas(nu + nb);
    if (nu) {
      points.leftCols(nu) = d.u.points;
      values.head(nu) = d.u.values;
      sigmas.head(nu) = d.u.sigmas;
    }
    if (nb) {
      points.rightCols(nb) = d.b.points;
      values.tail(nb) = d.b.values;
      sigmas.tail(nb) = d.b.sigmas;
    }
    auto tape = surrogate_->record(theta_s, points, JetOrder::kValue);
    const Vector& model = tape->jets().value;
    JetBatch adjoint = JetBatch::zeros(nu + nb, problem_->dim(), JetOrder::kValue);
    for (Eigen::Index j = 0; j < nu + nb; ++j) {
      const double s2 = sigmas[j] * sigmas[j];
      const double res = model[j] - values[j];
      total += -0.5 * (kLog2Pi + std::log(s2)) - res * res / (2.0 * s2);
      adjoint.value[j] = -res / s2;
    }
    if (grad) tape->pullback(adjoint, grad->head(ns));
  }

  require_finite(total, "log-likelihood");
  if (grad) {
    for (Eigen::Index i = 0; i < grad->size(); ++i)
      if (!std::isfinite((*grad)[i]))
        throw NumericalError("non-finite log-likelihood gradient component " + std::to_string(i),
                             static_cast<long>(i));
  }
  return total;
}

double LogPosteriorTarget::log_likelihood(const Vector& theta, Vector* grad) const {
  return likelihood_terms(theta, grad, true, true, true);
}

double LogPosteriorTarget::log_likelihood_u(const Vector& theta) const {
  return likelihood_terms(theta, nullptr, true, false, false);
}
double LogPosteriorTarget::log_likelihood_f(const Vector& theta) const {
  return likelihood_terms(theta, nullptr, false, true, false);
}
double LogPosteriorTarget::log_likelihood_b(const Vector& theta) const {
  return likelihood_terms(theta, nullptr, false, false, true);
}

double LogPosteriorTarget::log_prior(const Vector& theta, Vector* grad) const {
  if (theta.size() != dim()) throw DimensionError("theta length does not match the target");
  const Vector z = (theta - prior_mean_).cwiseQuotient(prior_std_);
  const double value = -0.5 * z.squaredNorm() - prior_std_.array().log().sum() - 0.5 * dim() * kLog2Pi;
  if (grad) *grad = -z.cwiseQuotient(prior_std_);
  require_finite(value, "log-prior");
  return value;
}

double LogPosteriorTarget::log_posterior(const Vector& theta, Vector* grad) const {
  if (!grad) return log_likelihood(theta) + log_prior(theta);
  Vector prior_grad;
  const double lp = log_prior(theta, &prior_grad);
  const double ll = log_likelihood(theta, grad);
  *grad += prior_grad;
  return ll + lp;
}

Matrix LogPosteriorTarget::predict(const Matrix& draws, const Matrix& points,
                                   Quantity quantity) const {
  if (draws.rows() != dim()) throw DimensionError("draws do not match the target dimension");
  const int ns = surrogate_->param_count();
  Matrix out(draws.cols(), points.cols());
  const JetOrder order = quantity == Quantity::kU ? JetOrder::kValue : JetOrder::kSecond;
  if (quantity == Quantity::kF && !problem_->has_residual())
    throw ConfigError("problem '" + problem_->name() + "' has no f to predict");
  for (Eigen::Index m = 0; m < draws.cols(); ++m) {
    const Vector theta = draws.col(m);
    const JetBatch jets = surrogate_->evaluate(theta.head(ns), points, order);
    if (quantity == Quantity::kU) {
      out.row(m) = jets.value.transpose();
    } else {
      const auto params = pde_params(theta);
      for (Eigen::Index j = 0; j < points.cols(); ++j) out(m, j) = problem_->residual(jets.at(j), params).f;
    }
  }
  return out;
}

double log_prior(const Vector& theta) {
  if (!theta.allFinite()) throw NumericalError("non-finite theta in log_prior");
  return -0.5 * theta.squaredNorm() - 0.5 * static_cast<double>(theta.size()) * kLog2Pi;
}

PredictiveStats predictive_stats(const Matrix& values) {
  if (values.rows() < 2) throw ConfigError("predictive statistics need at least two draws");
  // Welford update per column.
  const Eigen::Index p = values.cols();
  Vector mean = Vector::Zero(p), m2 = Vector::Zero(p);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    const Vector delta = values.row(i).transpose() - mean;
    mean += delta / static_cast<double>(i + 1);
    m2.array() += delta.array() * (values.row(i).transpose() - mean).array();
  }
  return {mean, (m2 / static_cast<double>(values.rows())).cwiseSqrt()};
}

PredictiveStats predictive_stats(const LogPosteriorTarget& target, const PosteriorSamples& samples,
                                 const Matrix& points, Quantity quantity) {
  if (samples.count() == 0) throw ConfigError("empty sample set");
  return predictive_stats(target.predict(samples.draws, points, quantity));
}

}  // namespace bpinn
