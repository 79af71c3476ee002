#pragma once

#include <cstdint>

#include "diffnum/tensor.hpp"

namespace diffnum::optimize {

/// Moment estimates for one parameter tensor. Default-constructed state means
/// "no steps taken yet"; adam_step lazily shapes the moments on first use.
struct AdamState {
  Tensor m;               // first moment (biased)
  Tensor v;               // second moment (biased)
  std::int64_t step = 0;  // completed updates
};

/// One bias-corrected Adam update. Returns the new parameter values (a plain
/// tensor, detached from any graph) and advances state in place. Throws
/// ShapeError on a parameter/gradient/state shape mismatch and SolverError
/// when the gradient contains a non-finite entry.
Tensor adam_step(const Tensor& param, const Tensor& g, AdamState& state, double lr,
                 double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

}  // namespace diffnum::optimize
