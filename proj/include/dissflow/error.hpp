#pragma once

#include <stdexcept>
#include <string>

namespace dissflow {

// Every failure raised by the library derives from Error. The C API maps
// each subclass onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMeasure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised by the transport solvers when the LP breaks down numerically.
/// For valid inputs this indicates a solver bug, never an infeasible model.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// No admissible selection of the field satisfies the stability bound.
class StabilityViolation : public Error {
 public:
  StabilityViolation(std::size_t step, double attempted_norm, double bound, std::string detail)
      : Error(std::move(detail)), step_(step), attempted_norm_(attempted_norm), bound_(bound) {}

  std::size_t step() const noexcept { return step_; }
  double attempted_norm() const noexcept { return attempted_norm_; }
  double bound() const noexcept { return bound_; }

 private:
  std::size_t step_;
  double attempted_norm_;
  double bound_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dissflow
