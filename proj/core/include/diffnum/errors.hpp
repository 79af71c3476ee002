#pragma once

#include <stdexcept>
#include <string>

namespace diffnum {

/// Violated shape or argument contract (both offending shapes are in the message).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numeric failure of an iterative or direct solver.
struct SolverError : std::runtime_error {
  double residual;
  explicit SolverError(const std::string& msg, double residual_ = 0.0)
      : std::runtime_error(msg), residual(residual_) {}
};

}  // namespace diffnum
