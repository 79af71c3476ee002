#include "diffnum/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace diffnum {

namespace {

Shape broadcast_shapes(const char* op, const Shape& a, const Shape& b) {
  const size_t ra = a.size(), rb = b.size(), rr = std::max(ra, rb);
  Shape r(rr);
  for (size_t i = 0; i < rr; ++i) {
    const std::int64_t ea = i < ra ? a[ra - 1 - i] : 1;
    const std::int64_t eb = i < rb ? b[rb - 1 - i] : 1;
    if (ea != eb && ea != 1 && eb != 1)
      throw ShapeError(std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) +
                       " do not broadcast");
    r[rr - 1 - i] = std::max(ea, eb);
  }
  return r;
}

std::vector<std::int64_t> row_major_strides(const Shape& s) {
  std::vector<std::int64_t> st(s.size());
  std::int64_t acc = 1;
  for (size_t i = s.size(); i-- > 0;) {
    st[i] = acc;
    acc *= s[i];
  }
  return st;
}

// Strides of `in` viewed in `result` index space (0 on broadcast dims).
std::vector<std::int64_t> broadcast_strides(const Shape& result, const Shape& in) {
  auto in_strides = row_major_strides(in);
  std::vector<std::int64_t> st(result.size(), 0);
  const size_t ri = in.size(), rr = result.size();
  for (size_t i = 0; i < ri; ++i) {
    const size_t d = rr - ri + i;
    st[d] = (in[i] == 1 && result[d] != 1) ? 0 : in_strides[i];
  }
  return st;
}

template <class F>
std::pair<Shape, std::vector<double>> ew_binary_values(const char* op, const Tensor& a,
                                                       const Tensor& b, F f) {
  Shape rs = broadcast_shapes(op, a.shape(), b.shape());
  const auto n = static_cast<size_t>(numel_of(rs));
  std::vector<double> out(n);
  const auto pa = a.data(), pb = b.data();
  if (a.shape() == b.shape()) {
    for (size_t i = 0; i < n; ++i) out[i] = f(pa[i], pb[i]);
    return {std::move(rs), std::move(out)};
  }
  const auto sa = broadcast_strides(rs, a.shape());
  const auto sb = broadcast_strides(rs, b.shape());
  const int rank = static_cast<int>(rs.size());
  std::vector<std::int64_t> idx(rs.size(), 0);
  std::int64_t offa = 0, offb = 0;
  for (size_t i = 0; i < n; ++i) {
    out[i] = f(pa[static_cast<size_t>(offa)], pb[static_cast<size_t>(offb)]);
    for (int d = rank - 1; d >= 0; --d) {
      ++idx[static_cast<size_t>(d)];
      offa += sa[static_cast<size_t>(d)];
      offb += sb[static_cast<size_t>(d)];
      if (idx[static_cast<size_t>(d)] < rs[static_cast<size_t>(d)]) break;
      offa -= sa[static_cast<size_t>(d)] * rs[static_cast<size_t>(d)];
      offb -= sb[static_cast<size_t>(d)] * rs[static_cast<size_t>(d)];
      idx[static_cast<size_t>(d)] = 0;
    }
  }
  return {std::move(rs), std::move(out)};
}

template <class F>
Tensor ew_binary(const char* op, const Tensor& a, const Tensor& b, F f, BackwardFn backward) {
  auto [shape, values] = ew_binary_values(op, a, b, f);
  return make_op(op, {a, b}, std::move(shape),
                 std::make_shared<const std::vector<double>>(std::move(values)),
                 std::move(backward));
}

template <class F>
Tensor ew_unary(const char* op, const Tensor& a, F f, BackwardFn backward) {
  const auto pa = a.data();
  std::vector<double> out(pa.size());
  for (size_t i = 0; i < pa.size(); ++i) out[i] = f(pa[i]);
  return make_op(op, {a}, a.shape(),
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 std::move(backward));
}

// 0/1 mask over the broadcast of (a, b), as a constant tensor.
Tensor comparison_mask(const Tensor& a, const Tensor& b, bool ge) {
  auto [shape, values] = ew_binary_values("mask", a, b, [ge](double x, double y) {
    return ge ? (x >= y ? 1.0 : 0.0) : (x < y ? 1.0 : 0.0);
  });
  return Tensor::from_vector(shape, std::move(values));
}

const Tensor& p0(const std::vector<Tensor>& parents) { return parents[0]; }
const Tensor& p1(const std::vector<Tensor>& parents) { return parents[1]; }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return ew_binary("add", a, b, [](double x, double y) { return x + y; },
                   [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                      const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                     return {reduce_to(cot[0], p0(ps).shape()), reduce_to(cot[0], p1(ps).shape())};
                   });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return ew_binary("sub", a, b, [](double x, double y) { return x - y; },
                   [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                      const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                     return {reduce_to(cot[0], p0(ps).shape()),
                             reduce_to(neg(cot[0]), p1(ps).shape())};
                   });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return ew_binary("mul", a, b, [](double x, double y) { return x * y; },
                   [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                      const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                     return {reduce_to(mul(cot[0], p1(ps)), p0(ps).shape()),
                             reduce_to(mul(cot[0], p0(ps)), p1(ps).shape())};
                   });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return ew_binary("div", a, b, [](double x, double y) { return x / y; },
                   [](const std::vector<Tensor>& out, const std::vector<Tensor>& cot,
                      const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                     // d(a/b)/da = 1/b ; d(a/b)/db = -(a/b)/b
                     Tensor ga = div(cot[0], p1(ps));
                     Tensor gb = neg(mul(ga, out[0]));
                     return {reduce_to(ga, p0(ps).shape()), reduce_to(gb, p1(ps).shape())};
                   });
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  return ew_binary("maximum", a, b, [](double x, double y) { return x >= y ? x : y; },
                   [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                      const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                     Tensor ma = comparison_mask(p0(ps), p1(ps), /*ge=*/true);
                     Tensor mb = comparison_mask(p0(ps), p1(ps), /*ge=*/false);
                     return {reduce_to(mul(cot[0], ma), p0(ps).shape()),
                             reduce_to(mul(cot[0], mb), p1(ps).shape())};
                   });
}

Tensor minimum(const Tensor& a, const Tensor& b) {
  return ew_binary("minimum", a, b, [](double x, double y) { return x <= y ? x : y; },
                   [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                      const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                     Tensor ma = comparison_mask(p1(ps), p0(ps), /*ge=*/true);   // a <= b
                     Tensor mb = comparison_mask(p1(ps), p0(ps), /*ge=*/false);  // b < a
                     return {reduce_to(mul(cot[0], ma), p0(ps).shape()),
                             reduce_to(mul(cot[0], mb), p1(ps).shape())};
                   });
}

Tensor neg(const Tensor& a) {
  return ew_unary("neg", a, [](double x) { return -x; },
                  [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                     const std::vector<Tensor>&) -> std::vector<Tensor> {
                    return {neg(cot[0])};
                  });
}

Tensor abs(const Tensor& a) {
  return ew_unary("abs", a, [](double x) { return std::abs(x); },
                  [](const std::vector<Tensor>& out, const std::vector<Tensor>& cot,
                     const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                    // x/|x|: NaN at 0, surfacing non-differentiability to gradcheck.
                    return {mul(cot[0], div(p0(ps), out[0]))};
                  });
}

Tensor pow(const Tensor& a, double exponent) {
  return ew_unary("pow", a, [exponent](double x) { return std::pow(x, exponent); },
                  [exponent](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                             const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                    // pow(a, 0) is constant: return the zero directly rather
                    // than 0 * pow(a, -1), which is NaN at a = 0.
                    if (exponent == 0.0) return {mul(cot[0], 0.0)};
                    return {mul(cot[0], mul(pow(p0(ps), exponent - 1.0), exponent))};
                  });
}

Tensor sqrt(const Tensor& a) {
  return ew_unary("sqrt", a, [](double x) { return std::sqrt(x); },
                  [](const std::vector<Tensor>& out, const std::vector<Tensor>& cot,
                     const std::vector<Tensor>&) -> std::vector<Tensor> {
                    return {mul(cot[0], div(0.5, out[0]))};
                  });
}

Tensor exp(const Tensor& a) {
  return ew_unary("exp", a, [](double x) { return std::exp(x); },
                  [](const std::vector<Tensor>& out, const std::vector<Tensor>& cot,
                     const std::vector<Tensor>&) -> std::vector<Tensor> {
                    return {mul(cot[0], out[0])};
                  });
}

Tensor log(const Tensor& a) {
  return ew_unary("log", a, [](double x) { return std::log(x); },
                  [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                     const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                    return {div(cot[0], p0(ps))};
                  });
}

Tensor sin(const Tensor& a) {
  return ew_unary("sin", a, [](double x) { return std::sin(x); },
                  [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                     const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                    return {mul(cot[0], cos(p0(ps)))};
                  });
}

Tensor cos(const Tensor& a) {
  return ew_unary("cos", a, [](double x) { return std::cos(x); },
                  [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                     const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                    return {neg(mul(cot[0], sin(p0(ps))))};
                  });
}

Tensor softplus(const Tensor& a) {
  return ew_unary("softplus", a,
                  [](double x) {
                    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
                  },
                  [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                     const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                    // sigmoid(x) = 1/(1+exp(-x)); saturates cleanly at both ends
                    return {div(cot[0], add(exp(neg(p0(ps))), 1.0))};
                  });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return make_op("sum", {a}, Shape{},
                 std::make_shared<const std::vector<double>>(std::vector<double>{acc}),
                 [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                    const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                   return {broadcast_to(cot[0], p0(ps).shape())};
                 });
}

Tensor sum_axis(const Tensor& a, std::int64_t axis, bool keepdims) {
  const auto& s = a.shape();
  if (axis < 0 || axis >= a.rank())
    throw ShapeError("sum_axis: axis " + std::to_string(axis) + " out of range for shape " +
                     shape_str(s));
  std::int64_t outer = 1, inner = 1;
  for (std::int64_t d = 0; d < axis; ++d) outer *= s[static_cast<size_t>(d)];
  for (std::int64_t d = axis + 1; d < a.rank(); ++d) inner *= s[static_cast<size_t>(d)];
  const std::int64_t ext = s[static_cast<size_t>(axis)];

  Shape out_shape;
  for (std::int64_t d = 0; d < a.rank(); ++d) {
    if (d == axis) {
      if (keepdims) out_shape.push_back(1);
    } else {
      out_shape.push_back(s[static_cast<size_t>(d)]);
    }
  }
  std::vector<double> out(static_cast<size_t>(outer * inner), 0.0);
  const auto pa = a.data();
  for (std::int64_t o = 0; o < outer; ++o)
    for (std::int64_t e = 0; e < ext; ++e)
      for (std::int64_t i = 0; i < inner; ++i)
        out[static_cast<size_t>(o * inner + i)] += pa[static_cast<size_t>((o * ext + e) * inner + i)];

  return make_op("sum_axis", {a}, std::move(out_shape),
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 [axis](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                        const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                   Shape keep = p0(ps).shape();
                   keep[static_cast<size_t>(axis)] = 1;
                   return {broadcast_to(reshape(cot[0], keep), p0(ps).shape())};
                 });
}

Tensor mean(const Tensor& a) { return div(sum(a), static_cast<double>(a.numel())); }

namespace {

Tensor matmul2d(const Tensor& a, const Tensor& b) {
  const std::int64_t n = a.extent(0), k = a.extent(1), m = b.extent(1);
  if (b.extent(0) != k)
    throw ShapeError("matmul: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                     " are incompatible");
  std::vector<double> out(static_cast<size_t>(n * m), 0.0);
  const auto pa = a.data(), pb = b.data();
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t kk = 0; kk < k; ++kk) {
      const double av = pa[static_cast<size_t>(i * k + kk)];
      if (av == 0.0) continue;
      for (std::int64_t j = 0; j < m; ++j)
        out[static_cast<size_t>(i * m + j)] += av * pb[static_cast<size_t>(kk * m + j)];
    }
  return make_op("matmul", {a, b}, Shape{n, m},
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                    const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                   return {matmul(cot[0], transpose(p1(ps))), matmul(transpose(p0(ps)), cot[0])};
                 });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() == 2 && b.rank() == 2) return matmul2d(a, b);
  if (a.rank() == 2 && b.rank() == 1) {
    Tensor r = matmul2d(a, reshape(b, {b.extent(0), 1}));
    return reshape(r, {a.extent(0)});
  }
  if (a.rank() == 1 && b.rank() == 2) {
    Tensor r = matmul2d(reshape(a, {1, a.extent(0)}), b);
    return reshape(r, {b.extent(1)});
  }
  throw ShapeError("matmul: unsupported ranks for shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()));
}

Tensor dot(const Tensor& a, const Tensor& b) {
  if (a.rank() != 1 || b.rank() != 1 || a.numel() != b.numel())
    throw ShapeError("dot: expects equal-length vectors, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  return sum(mul(a, b));
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2)
    throw ShapeError("transpose: expects a matrix, shape is " + shape_str(a.shape()));
  const std::int64_t n = a.extent(0), m = a.extent(1);
  std::vector<double> out(static_cast<size_t>(n * m));
  const auto pa = a.data();
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < m; ++j)
      out[static_cast<size_t>(j * n + i)] = pa[static_cast<size_t>(i * m + j)];
  return make_op("transpose", {a}, Shape{m, n},
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                    const std::vector<Tensor>&) -> std::vector<Tensor> {
                   return {transpose(cot[0])};
                 });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
  if (numel_of(shape) != a.numel())
    throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  // Shares the buffer; only the shape changes.
  return make_op("reshape", {a}, shape, a.buffer(),
                 [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                    const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                   return {reshape(cot[0], p0(ps).shape())};
                 });
}

Tensor broadcast_to(const Tensor& a, const Shape& shape) {
  Shape check = broadcast_shapes("broadcast_to", a.shape(), shape);
  if (check != shape)
    throw ShapeError("broadcast_to: cannot broadcast " + shape_str(a.shape()) + " to " +
                     shape_str(shape));
  const auto n = static_cast<size_t>(numel_of(shape));
  std::vector<double> out(n);
  const auto pa = a.data();
  const auto sa = broadcast_strides(shape, a.shape());
  const int rank = static_cast<int>(shape.size());
  std::vector<std::int64_t> idx(shape.size(), 0);
  std::int64_t offa = 0;
  for (size_t i = 0; i < n; ++i) {
    out[i] = pa[static_cast<size_t>(offa)];
    for (int d = rank - 1; d >= 0; --d) {
      ++idx[static_cast<size_t>(d)];
      offa += sa[static_cast<size_t>(d)];
      if (idx[static_cast<size_t>(d)] < shape[static_cast<size_t>(d)]) break;
      offa -= sa[static_cast<size_t>(d)] * shape[static_cast<size_t>(d)];
      idx[static_cast<size_t>(d)] = 0;
    }
  }
  return make_op("broadcast_to", {a}, shape,
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 [](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                    const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                   return {reduce_to(cot[0], p0(ps).shape())};
                 });
}

Tensor reduce_to(const Tensor& a, const Shape& shape) {
  Tensor r = a;
  while (r.rank() > static_cast<std::int64_t>(shape.size())) r = sum_axis(r, 0, false);
  for (std::int64_t d = 0; d < r.rank(); ++d) {
    if (shape[static_cast<size_t>(d)] == 1 && r.extent(d) != 1) r = sum_axis(r, d, true);
  }
  if (r.shape() != shape) {
    if (numel_of(shape) != r.numel())
      throw ShapeError("reduce_to: cannot reduce " + shape_str(a.shape()) + " to " +
                       shape_str(shape));
    r = reshape(r, shape);
  }
  return r;
}

Tensor slice(const Tensor& a, std::int64_t axis, std::int64_t start, std::int64_t stop) {
  const auto& s = a.shape();
  if (axis < 0 || axis >= a.rank() || start < 0 || stop > s[static_cast<size_t>(axis)] ||
      start > stop)
    throw ShapeError("slice: range [" + std::to_string(start) + "," + std::to_string(stop) +
                     ") on axis " + std::to_string(axis) + " invalid for shape " + shape_str(s));
  std::int64_t outer = 1, inner = 1;
  for (std::int64_t d = 0; d < axis; ++d) outer *= s[static_cast<size_t>(d)];
  for (std::int64_t d = axis + 1; d < a.rank(); ++d) inner *= s[static_cast<size_t>(d)];
  const std::int64_t ext = s[static_cast<size_t>(axis)], len = stop - start;
  Shape out_shape = s;
  out_shape[static_cast<size_t>(axis)] = len;
  std::vector<double> out(static_cast<size_t>(outer * len * inner));
  const auto pa = a.data();
  for (std::int64_t o = 0; o < outer; ++o)
    for (std::int64_t e = 0; e < len; ++e)
      std::copy_n(pa.data() + (o * ext + start + e) * inner, inner,
                  out.data() + (o * len + e) * inner);
  return make_op("slice", {a}, std::move(out_shape),
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 [axis, start, stop](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                                     const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                   const auto& ss = p0(ps).shape();
                   const std::int64_t ext2 = ss[static_cast<size_t>(axis)];
                   std::vector<Tensor> parts;
                   if (start > 0) {
                     Shape pre = ss;
                     pre[static_cast<size_t>(axis)] = start;
                     parts.push_back(Tensor::zeros(pre));
                   }
                   parts.push_back(cot[0]);
                   if (stop < ext2) {
                     Shape post = ss;
                     post[static_cast<size_t>(axis)] = ext2 - stop;
                     parts.push_back(Tensor::zeros(post));
                   }
                   return {concat(parts, axis)};
                 });
}

Tensor concat(const std::vector<Tensor>& parts, std::int64_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const auto& s0 = parts[0].shape();
  if (axis < 0 || axis >= parts[0].rank())
    throw ShapeError("concat: axis " + std::to_string(axis) + " invalid for shape " +
                     shape_str(s0));
  std::int64_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != parts[0].rank())
      throw ShapeError("concat: rank mismatch between " + shape_str(s0) + " and " +
                       shape_str(p.shape()));
    for (std::int64_t d = 0; d < p.rank(); ++d)
      if (d != axis && p.extent(d) != s0[static_cast<size_t>(d)])
        throw ShapeError("concat: shapes " + shape_str(s0) + " and " + shape_str(p.shape()) +
                         " differ off-axis");
    total += p.extent(axis);
  }
  Shape out_shape = s0;
  out_shape[static_cast<size_t>(axis)] = total;
  std::int64_t outer = 1, inner = 1;
  for (std::int64_t d = 0; d < axis; ++d) outer *= s0[static_cast<size_t>(d)];
  for (std::int64_t d = axis + 1; d < parts[0].rank(); ++d) inner *= s0[static_cast<size_t>(d)];
  std::vector<double> out(static_cast<size_t>(numel_of(out_shape)));
  std::int64_t off = 0;
  for (const auto& p : parts) {
    const std::int64_t ext = p.extent(axis);
    const auto pp = p.data();
    for (std::int64_t o = 0; o < outer; ++o)
      std::copy_n(pp.data() + o * ext * inner, ext * inner,
                  out.data() + (o * total + off) * inner);
    off += ext;
  }
  std::vector<Tensor> parents = parts;
  return make_op("concat", std::move(parents), std::move(out_shape),
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 [axis](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                        const std::vector<Tensor>& ps) -> std::vector<Tensor> {
                   std::vector<Tensor> gs;
                   gs.reserve(ps.size());
                   std::int64_t pos = 0;
                   for (const auto& p : ps) {
                     gs.push_back(slice(cot[0], axis, pos, pos + p.extent(axis)));
                     pos += p.extent(axis);
                   }
                   return gs;
                 });
}

Tensor index(const Tensor& a, std::int64_t i) {
  Tensor row = slice(a, 0, i, i + 1);
  Shape out = a.shape();
  out.erase(out.begin());
  return reshape(row, out);
}

Tensor take(const Tensor& a, const std::vector<std::int64_t>& idx) {
  if (a.rank() < 1) throw ShapeError("take: scalar input");
  const std::int64_t ext = a.extent(0);
  const std::int64_t row = a.numel() / std::max<std::int64_t>(ext, 1);
  for (auto i : idx)
    if (i < 0 || i >= ext)
      throw ShapeError("take: index " + std::to_string(i) + " out of range [0," +
                       std::to_string(ext) + ")");
  Shape out_shape = a.shape();
  out_shape[0] = static_cast<std::int64_t>(idx.size());
  std::vector<double> out(static_cast<size_t>(row) * idx.size());
  const auto pa = a.data();
  for (size_t r = 0; r < idx.size(); ++r)
    std::copy_n(pa.data() + idx[r] * row, row, out.data() + static_cast<std::int64_t>(r) * row);
  return make_op("take", {a}, std::move(out_shape),
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 [idx, ext](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                            const std::vector<Tensor>&) -> std::vector<Tensor> {
                   return {scatter_rows(ext, idx, cot[0])};
                 });
}

Tensor scatter_rows(std::int64_t extent0, const std::vector<std::int64_t>& idx,
                    const Tensor& src) {
  if (src.rank() < 1 || src.extent(0) != static_cast<std::int64_t>(idx.size()))
    throw ShapeError("scatter_rows: leading extent of " + shape_str(src.shape()) +
                     " must equal index count " + std::to_string(idx.size()));
  const std::int64_t row = src.numel() / std::max<std::int64_t>(src.extent(0), 1);
  Shape out_shape = src.shape();
  out_shape[0] = extent0;
  std::vector<double> out(static_cast<size_t>(extent0 * row), 0.0);
  const auto ps = src.data();
  for (size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= extent0)
      throw ShapeError("scatter_rows: index " + std::to_string(idx[r]) + " out of range [0," +
                       std::to_string(extent0) + ")");
    for (std::int64_t c = 0; c < row; ++c)
      out[static_cast<size_t>(idx[r] * row + c)] +=
          ps[static_cast<size_t>(static_cast<std::int64_t>(r) * row + c)];
  }
  return make_op("scatter_rows", {src}, std::move(out_shape),
                 std::make_shared<const std::vector<double>>(std::move(out)),
                 [idx](const std::vector<Tensor>&, const std::vector<Tensor>& cot,
                       const std::vector<Tensor>&) -> std::vector<Tensor> {
                   return {take(cot[0], idx)};
                 });
}

Tensor flatten(const Tensor& a) { return reshape(a, {a.numel()}); }

Tensor add(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
Tensor sub(const Tensor& a, double b) { return sub(a, Tensor::scalar(b)); }
Tensor sub(double a, const Tensor& b) { return sub(Tensor::scalar(a), b); }
Tensor mul(const Tensor& a, double b) { return mul(a, Tensor::scalar(b)); }
Tensor div(const Tensor& a, double b) { return div(a, Tensor::scalar(b)); }
Tensor div(double a, const Tensor& b) { return div(Tensor::scalar(a), b); }

}  // namespace diffnum
