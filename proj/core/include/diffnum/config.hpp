#pragma once

#include <cstdint>
#include <string>

namespace diffnum {

/// Per-functional numeric policy. `method` is interpreted by each functional
/// ("auto" picks a sensible default); unrelated fields are ignored.
struct SolverConfig {
  std::string method = "auto";
  double tol = 1e-8;     // residual / gradient tolerance
  double rtol = 1e-7;    // integrator relative tolerance
  double atol = 1e-9;    // integrator absolute tolerance
  int max_iter = 200;    // iteration budget (solvers)
  int max_steps = 100000;  // step budget (integrators, subdivisions)
  double damping = 1.0;  // initial line-search step scale
  int panels = 0;        // quad: fixed panel count (0 = adaptive)
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

}  // namespace diffnum
