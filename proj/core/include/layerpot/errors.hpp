#pragma once

#include <stdexcept>
#include <string>

namespace layerpot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the domain of the operation (t <= 0, z = 0, r >= R, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A modulus fails a Dini integrability condition (not DS, not DL_d).
class NotDiniError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A memory or size budget was exceeded.
class BudgetError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace layerpot
