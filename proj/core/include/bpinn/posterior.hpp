#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bpinn/dataset.hpp"
#include "bpinn/pde.hpp"
#include "bpinn/surrogate.hpp"

namespace bpinn {

class Rng;

// Unnormalised log-density over R^dim with its exact gradient. Samplers and
// variational fits only consume differences, so additive constants are free.
class LogDensity {
 public:
  virtual ~LogDensity() = default;

  virtual int dim() const = 0;

  // Returns log p(theta); when `grad` is non-null it is resized and
  // overwritten with d log p / d theta.
  virtual double log_density(const Vector& theta, Vector* grad) const = 0;

  // Starting state for chains. Defaults to a standard normal draw.
  virtual Vector initial_state(Rng& rng) const;
};

// Ordered draws (one column per draw) with sampler metadata.
struct PosteriorSamples {
  Matrix draws;  // dim x M
  double acceptance_rate = 1.0;
  std::uint64_t seed = 0;
  std::string sampler;
  std::vector<std::string> warnings;

  Eigen::Index count() const { return draws.cols(); }
  Eigen::Index dim() const { return draws.rows(); }
};

enum class InferenceMode { kForward, kInverse };

// log P(theta | D) up to a constant: the Gaussian likelihood of the u, f and
// b sensors plus independent Gaussian priors on every component of theta.
//
// theta = [surrogate parameters | unknown PDE parameters]. The likelihood
// keeps its normalising constants.
class LogPosteriorTarget final : public LogDensity {
 public:
  // `prior_std`, when non-empty, gives per-component prior standard
  // deviations for the surrogate block (standard normal otherwise).
  LogPosteriorTarget(ProblemPtr problem, std::shared_ptr<const Surrogate> surrogate,
                     std::shared_ptr<const SensorDataset> data, InferenceMode mode,
                     Vector prior_std = {});

  int dim() const override { return surrogate_->param_count() + unknown_count_; }
  int surrogate_param_count() const { return surrogate_->param_count(); }
  int unknown_count() const { return unknown_count_; }
  InferenceMode mode() const { return mode_; }

  const PdeProblem& problem() const { return *problem_; }
  const Surrogate& surrogate() const { return *surrogate_; }
  const SensorDataset& data() const { return *data_; }

  double log_likelihood(const Vector& theta, Vector* grad = nullptr) const;
  double log_prior(const Vector& theta, Vector* grad = nullptr) const;
  double log_posterior(const Vector& theta, Vector* grad = nullptr) const;

  double log_density(const Vector& theta, Vector* grad) const override {
    return log_posterior(theta, grad);
  }
  Vector initial_state(Rng& rng) const override;

  // All PDE parameters in declaration order, unknown ones read from theta.
  std::vector<double> pde_params(const Vector& theta) const;

  // u or f of every draw at every point: (draws x points).
  Matrix predict(const Matrix& draws, const Matrix& points, Quantity quantity) const;

  // Per-set likelihood terms, exposed for decomposition checks.
  double log_likelihood_u(const Vector& theta) const;
  double log_likelihood_f(const Vector& theta) const;
  double log_likelihood_b(const Vector& theta) const;

 private:
  double likelihood_terms(const Vector& theta, Vector* grad, bool use_u, bool use_f,
                          bool use_b) const;

  ProblemPtr problem_;
  std::shared_ptr<const Surrogate> surrogate_;
  std::shared_ptr<const SensorDataset> data_;
  InferenceMode mode_;
  Vector prior_std_;  // surrogate block followed by unknown parameters
  Vector prior_mean_;
  int unknown_count_ = 0;
  std::vector<int> unknown_slots_;  // index into problem params per unknown
};

// -||theta||^2 / 2 - (d/2) log(2 pi).
double log_prior(const Vector& theta);

// Pointwise mean and population (divide by M) standard deviation.
struct PredictiveStats {
  Vector mean;
  Vector std;
};

// `values` is (draws x points). Throws ConfigError with fewer than 2 draws.
PredictiveStats predictive_stats(const Matrix& values);
PredictiveStats predictive_stats(const LogPosteriorTarget& target, const PosteriorSamples& samples,
                                 const Matrix& points, Quantity quantity);

}  // namespace bpinn
