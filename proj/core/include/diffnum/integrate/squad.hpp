#pragma once

#include <cstdint>

#include "diffnum/tensor.hpp"

namespace diffnum::integrate {

/// Definite integral of sampled data: y holds samples of a function at the
/// strictly increasing nodes x (rank-1, n >= 2). y may be rank 1 with
/// extent n, or rank 2 with extent(dim) == n; the node axis is reduced away.
///
/// Scheme: composite Simpson when the nodes are uniformly spaced (exact for
/// quadratics); with an odd number of uniform intervals the last one falls
/// back to a trapezoid tail; non-uniform nodes use the trapezoid rule
/// throughout, and n == 2 is always a single trapezoid. The weights are built
/// from x with tensor ops, so the result differentiates wrt both x and y.
///
/// Throws std::invalid_argument when x is unsorted or has duplicates, and
/// ShapeError for rank/extent mismatches.
Tensor squad(const Tensor& x, const Tensor& y, std::int64_t dim = 0);

/// Cumulative trapezoid integral along dim: out[0] = 0 and
/// out[k] = sum_{i<k} (y[i] + y[i+1])/2 * (x[i+1] - x[i]), same shape as y.
/// The cumulative form stays with the trapezoid rule so every prefix uses
/// one consistent scheme. Same input contract as squad.
Tensor squad_cumulative(const Tensor& x, const Tensor& y, std::int64_t dim = 0);

}  // namespace diffnum::integrate
