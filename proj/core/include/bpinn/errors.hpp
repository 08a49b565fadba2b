#pragma once

#include <stdexcept>
#include <string>

namespace bpinn {

// All library failures derive from Error so callers can map them onto exit
// codes in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector or matrix sizes that do not match the declared architecture.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Evaluation point outside the domain of a surrogate or problem.
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered. `index` names the offending component or step when
// one is known, -1 otherwise.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, long index = -1)
      : Error(what), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

// Root finding or factorization that failed to converge.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what, long index = -1)
      : Error(what), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

// Invalid or inconsistent configuration (missing parameters, bad pairings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unknown command-line names such as experiment or estimator keys.
class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace bpinn
