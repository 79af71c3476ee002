#include "diffnum/integrate/squad.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffnum/errors.hpp"
#include "diffnum/ops.hpp"

namespace diffnum::integrate {

namespace {

std::int64_t check_nodes(const char* who, const Tensor& x) {
  if (!x.defined() || x.rank() != 1)
    throw ShapeError(std::string(who) + ": x must be a rank-1 node vector");
  const std::int64_t n = x.extent(0);
  if (n < 2) throw std::invalid_argument(std::string(who) + ": need at least 2 nodes");
  const auto xd = x.data();
  for (std::int64_t i = 0; i + 1 < n; ++i)
    if (!(xd[i] < xd[static_cast<size_t>(i) + 1]))
      throw std::invalid_argument(std::string(who) +
                                  ": nodes must be strictly increasing (duplicate or unsorted "
                                  "entry at index " +
                                  std::to_string(i + 1) + ")");
  return n;
}

bool uniform_nodes(const Tensor& x) {
  const auto xd = x.data();
  const size_t n = xd.size();
  const double h0 = xd[1] - xd[0];
  double scale = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) scale = std::max(scale, std::abs(xd[i + 1] - xd[i]));
  for (size_t i = 0; i + 1 < n; ++i)
    if (std::abs((xd[i + 1] - xd[i]) - h0) > 1e-12 * scale) return false;
  return true;
}

Tensor spacings(const Tensor& x, std::int64_t n) {
  return sub(slice(x, 0, 1, n), slice(x, 0, 0, n - 1));
}

// Node weights w so the integral is sum_i w_i y_i, built from x with tensor
// ops (the scheme choice itself is a plain predicate on the node values).
Tensor node_weights(const Tensor& x, std::int64_t n) {
  if (n > 2 && uniform_nodes(x)) {
    // Composite Simpson coefficients (times h); an odd interval count gets a
    // Simpson head over the first n-1 nodes plus one trapezoid tail.
    const std::int64_t intervals = n - 1;
    const std::int64_t simpson_last = (intervals % 2 == 0) ? n - 1 : n - 2;
    std::vector<double> c(static_cast<size_t>(n), 0.0);
    c[0] = 1.0 / 3.0;
    c[static_cast<size_t>(simpson_last)] += 1.0 / 3.0;
    for (std::int64_t i = 1; i < simpson_last; ++i)
      c[static_cast<size_t>(i)] = (i % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
    if (simpson_last == n - 2) {
      c[static_cast<size_t>(n - 2)] += 0.5;
      c[static_cast<size_t>(n - 1)] += 0.5;
    }
    Tensor h = div(sub(index(x, n - 1), index(x, 0)), static_cast<double>(n - 1));
    return mul(Tensor::from_vector({n}, std::move(c)), h);
  }
  // Trapezoid: each node takes half of its adjacent spacings.
  Tensor dx = spacings(x, n);
  Tensor z1 = Tensor::zeros({1});
  return mul(add(concat({dx, z1}, 0), concat({z1, dx}, 0)), 0.5);
}

void check_extent(const char* who, const Tensor& y, std::int64_t dim, std::int64_t n) {
  if (!y.defined() || y.rank() < 1 || y.rank() > 2)
    throw ShapeError(std::string(who) + ": y must be rank 1 or 2");
  if (dim < 0 || dim >= y.rank())
    throw ShapeError(std::string(who) + ": dim " + std::to_string(dim) + " out of range for " +
                     shape_str(y.shape()));
  if (y.extent(dim) != n)
    throw ShapeError(std::string(who) + ": y extent " + std::to_string(y.extent(dim)) +
                     " along dim " + std::to_string(dim) + " does not match " +
                     std::to_string(n) + " nodes");
}

}  // namespace

Tensor squad(const Tensor& x, const Tensor& y, std::int64_t dim) {
  const std::int64_t n = check_nodes("squad", x);
  check_extent("squad", y, dim, n);
  Tensor w = node_weights(x, n);
  if (y.rank() == 1) return sum(mul(w, y));
  if (dim == 0) return sum_axis(mul(reshape(w, {n, 1}), y), 0);
  return sum_axis(mul(reshape(w, {1, n}), y), 1);
}

Tensor squad_cumulative(const Tensor& x, const Tensor& y, std::int64_t dim) {
  const std::int64_t n = check_nodes("squad_cumulative", x);
  check_extent("squad_cumulative", y, dim, n);
  if (y.rank() == 2 && dim == 1)
    return transpose(squad_cumulative(x, transpose(y), 0));

  // Segment contributions seg_i = (y_i + y_{i+1})/2 * dx_i, then a prefix sum
  // via a constant strictly-lower-triangular ones matrix so out[0] = 0.
  const bool was_vec = y.rank() == 1;
  Tensor y2 = was_vec ? reshape(y, {n, 1}) : y;
  const std::int64_t m = y2.extent(1);
  Tensor ya = slice(y2, 0, 0, n - 1);
  Tensor yb = slice(y2, 0, 1, n);
  Tensor seg = mul(mul(add(ya, yb), 0.5), reshape(spacings(x, n), {n - 1, 1}));
  std::vector<double> lo(static_cast<size_t>(n * (n - 1)), 0.0);
  for (std::int64_t k = 1; k < n; ++k)
    for (std::int64_t i = 0; i < k; ++i) lo[static_cast<size_t>(k * (n - 1) + i)] = 1.0;
  Tensor prefix = matmul(Tensor::from_vector({n, n - 1}, std::move(lo)), seg);
  return was_vec ? reshape(prefix, {n}) : prefix;
}

}  // namespace diffnum::integrate
