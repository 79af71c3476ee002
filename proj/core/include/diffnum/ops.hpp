#pragma once

#include <cstdint>
#include <vector>

#include "diffnum/autograd.hpp"
#include "diffnum/tensor.hpp"

namespace diffnum {

// Elementwise with trailing-dimension broadcasting. Shapes that do not conform
// raise ShapeError naming both shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor pow(const Tensor& a, double exponent);
Tensor sqrt(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor softplus(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor sum_axis(const Tensor& a, std::int64_t axis, bool keepdims = false);
Tensor mean(const Tensor& a);

// matmul accepts (n,k)x(k,m), (n,k)x(k), (k)x(k,m); dot is 1-D only.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor dot(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor reshape(const Tensor& a, const Shape& shape);
Tensor broadcast_to(const Tensor& a, const Shape& shape);

/// Sums over broadcast dimensions so the result has exactly `shape`.
Tensor reduce_to(const Tensor& a, const Shape& shape);

Tensor slice(const Tensor& a, std::int64_t axis, std::int64_t start, std::int64_t stop);
Tensor concat(const std::vector<Tensor>& parts, std::int64_t axis);

/// Row `i` of the input, with the leading axis dropped.
Tensor index(const Tensor& a, std::int64_t i);

/// Rows of `a` (along axis 0) selected by `idx`, in order.
Tensor take(const Tensor& a, const std::vector<std::int64_t>& idx);

/// Tensor of leading extent `extent0` whose rows at `idx` accumulate the rows
/// of `src` (duplicate indices add).
Tensor scatter_rows(std::int64_t extent0, const std::vector<std::int64_t>& idx,
                    const Tensor& src);

Tensor flatten(const Tensor& a);

// Scalar conveniences.
Tensor add(const Tensor& a, double b);
Tensor sub(const Tensor& a, double b);
Tensor sub(double a, const Tensor& b);
Tensor mul(const Tensor& a, double b);
Tensor div(const Tensor& a, double b);
Tensor div(double a, const Tensor& b);

}  // namespace diffnum
