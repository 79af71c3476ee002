#pragma once

#include "diffnum/tensor.hpp"

namespace diffnum::interp {

enum class InterpKind {
  linear,  // piecewise linear between neighboring nodes
  cubic,   // C1 cubic Hermite with monotonicity-safe secant-based tangents
};

enum class Extrapolation {
  error,  // queries outside [x[0], x[n-1]] throw std::out_of_range
  clamp,  // queries are clamped to the node range (flat continuation)
};

/// Interpolates the table (x, y) at the query points xq. x is a rank-1,
/// strictly increasing node vector with n >= 2 entries; y is rank-1 with the
/// same extent; xq may have any shape and the result matches it. Values at
/// the nodes reproduce y exactly for both kinds.
///
/// The cubic kind uses PCHIP-style tangents: a spacing-weighted harmonic mean
/// of the adjacent secants, zeroed where the secants disagree in sign, with
/// plain secants at the two ends — so monotone data yields a monotone
/// interpolant. Everything is assembled from primitive tensor ops, which
/// makes the result differentiable wrt x, y, and xq to any order (away from
/// the finitely many tangent-limiting switch points).
///
/// Throws ShapeError for rank/extent mismatches, std::invalid_argument for
/// non-monotone nodes, and std::out_of_range under the `error` policy.
Tensor interp1d(const Tensor& x, const Tensor& y, const Tensor& xq,
                InterpKind kind = InterpKind::linear,
                Extrapolation extrapolation = Extrapolation::error);

}  // namespace diffnum::interp
