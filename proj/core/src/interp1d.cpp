#include "diffnum/interp/interp1d.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffnum/errors.hpp"
#include "diffnum/ops.hpp"

namespace diffnum::interp {

namespace {

// PCHIP-style node tangents: spacing-weighted harmonic mean of the adjacent
// secants, zeroed where the secants disagree in sign (that keeps every
// Hermite piece inside the Fritsch-Carlson monotonicity region), with plain
// secants at the two boundary nodes. The sign test is a plain predicate on
// values; the surviving branch is built from tensor ops so derivatives flow.
Tensor tangents(const Tensor& x, const Tensor& y, std::int64_t n) {
  Tensor dx = sub(slice(x, 0, 1, n), slice(x, 0, 0, n - 1));
  Tensor s = div(sub(slice(y, 0, 1, n), slice(y, 0, 0, n - 1)), dx);
  Tensor m0 = slice(s, 0, 0, 1);
  Tensor mn = slice(s, 0, n - 2, n - 1);
  if (n == 2) return concat({m0, mn}, 0);

  Tensor sl = slice(s, 0, 0, n - 2), sr = slice(s, 0, 1, n - 1);
  Tensor hl = slice(dx, 0, 0, n - 2), hr = slice(dx, 0, 1, n - 1);
  Tensor w1 = add(mul(hr, 2.0), hl);
  Tensor w2 = add(mul(hl, 2.0), hr);
  const auto sld = sl.data(), srd = sr.data();
  std::vector<double> maskv(sld.size()), pinv(sld.size());
  for (size_t i = 0; i < sld.size(); ++i) {
    const bool on = sld[i] * srd[i] > 0.0;
    maskv[i] = on ? 1.0 : 0.0;
    pinv[i] = on ? 0.0 : 1.0;  // pins the dead branch's denominator to 1
  }
  Tensor mask = Tensor::from_vector({n - 2}, std::move(maskv));
  Tensor num = mul(mul(add(w1, w2), sl), sr);
  Tensor den = add(mul(add(mul(w1, sr), mul(w2, sl)), mask),
                   Tensor::from_vector({n - 2}, std::move(pinv)));
  Tensor mi = mul(mask, div(num, den));
  return concat({m0, mi, mn}, 0);
}

}  // namespace

Tensor interp1d(const Tensor& x, const Tensor& y, const Tensor& xq, InterpKind kind,
                Extrapolation extrapolation) {
  if (!x.defined() || x.rank() != 1)
    throw ShapeError("interp1d: x must be a rank-1 node vector");
  const std::int64_t n = x.extent(0);
  if (n < 2) throw std::invalid_argument("interp1d: need at least 2 nodes");
  if (!y.defined() || y.rank() != 1 || y.extent(0) != n)
    throw ShapeError("interp1d: y must be rank-1 with one value per node, got " +
                     (y.defined() ? shape_str(y.shape()) : std::string("<undefined>")) + " for " +
                     std::to_string(n) + " nodes");
  if (!xq.defined()) throw ShapeError("interp1d: xq is undefined");
  const auto xd = x.data();
  for (std::int64_t i = 0; i + 1 < n; ++i)
    if (!(xd[i] < xd[static_cast<size_t>(i) + 1]))
      throw std::invalid_argument("interp1d: nodes must be strictly increasing (offending index " +
                                  std::to_string(i + 1) + ")");

  Tensor q = flatten(xq);
  if (extrapolation == Extrapolation::error) {
    for (double v : q.data())
      if (v < xd[0] || v > xd[static_cast<size_t>(n) - 1])
        throw std::out_of_range("interp1d: query " + std::to_string(v) + " outside [" +
                                std::to_string(xd[0]) + ", " +
                                std::to_string(xd[static_cast<size_t>(n) - 1]) + "]");
  } else {
    // Clamping through min/max keeps the op graph intact and gives clamped
    // queries the correct zero derivative.
    q = minimum(maximum(q, index(x, 0)), index(x, n - 1));
  }

  // Bracket each (clamped) query: i = last node with x[i] <= q, capped so the
  // final node lands on the last interval with t = 1.
  const auto qd = q.data();
  std::vector<std::int64_t> idx(qd.size()), idxp(qd.size());
  for (size_t k = 0; k < qd.size(); ++k) {
    auto it = std::upper_bound(xd.begin(), xd.end(), qd[k]);
    std::int64_t i = static_cast<std::int64_t>(it - xd.begin()) - 1;
    i = std::clamp<std::int64_t>(i, 0, n - 2);
    idx[k] = i;
    idxp[k] = i + 1;
  }

  Tensor xi = take(x, idx), xip = take(x, idxp);
  Tensor yi = take(y, idx), yip = take(y, idxp);
  Tensor h = sub(xip, xi);
  Tensor t = div(sub(q, xi), h);

  Tensor p;
  if (kind == InterpKind::linear) {
    // Convex form rather than yi + t*(yip - yi): exact at both endpoints.
    p = add(mul(yi, sub(1.0, t)), mul(yip, t));
  } else {
    Tensor m = tangents(x, y, n);
    Tensor mi = take(m, idx), mip = take(m, idxp);
    Tensor t2 = mul(t, t);
    Tensor t3 = mul(t2, t);
    Tensor h00 = add(sub(mul(t3, 2.0), mul(t2, 3.0)), 1.0);
    Tensor h10 = add(sub(t3, mul(t2, 2.0)), t);
    Tensor h01 = sub(mul(t2, 3.0), mul(t3, 2.0));
    Tensor h11 = sub(t3, t2);
    p = add(add(mul(h00, yi), mul(mul(h10, h), mi)),
            add(mul(h01, yip), mul(mul(h11, h), mip)));
  }
  return reshape(p, xq.shape());
}

}  // namespace diffnum::interp
