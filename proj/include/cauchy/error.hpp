#pragma once

#include <stdexcept>
#include <string>

namespace cauchy {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent user configuration (orders, variants, tolerances, data).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed, degenerate, or nonconforming mesh input.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Factorization failure, residual check failure, or iteration non-convergence.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double condition_estimate = -1.0)
      : Error(what), condition_estimate_(condition_estimate) {}

  /// 1-norm condition estimate of the failing matrix, or a negative value when unavailable.
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace cauchy
