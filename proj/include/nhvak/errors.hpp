#pragma once

#include <stdexcept>
#include <string>

namespace nhvak {

/// Violated precondition of a library call (dimension mismatch, argument
/// outside the required subspace, malformed input data).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The reduced mass matrix on the constraint subspace is singular or
/// too badly conditioned to integrate.
class RegularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A trajectory left the finite range during integration.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// The (trajectory, multiplier) pair handed to a check is not a vakonomic
/// extremal; carries the measured residual.
class NotVakonomicError : public ContractError {
 public:
  NotVakonomicError(const std::string& what, double residual)
      : ContractError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace nhvak
