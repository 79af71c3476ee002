#include "demo_common.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "diffnum/autograd.hpp"
#include "diffnum/errors.hpp"
#include "diffnum/ops.hpp"
#include "diffnum/optimize/rootfinder.hpp"
#include "diffnum/rng.hpp"

namespace demos {

using namespace diffnum;

Mlp make_mlp(const std::vector<std::int64_t>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least two layer sizes");
  Rng rng(seed);
  Mlp net;
  net.sizes = sizes;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::int64_t fan_in = sizes[l], fan_out = sizes[l + 1];
    if (fan_in < 1 || fan_out < 1)
      throw std::invalid_argument("make_mlp: layer sizes must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::vector<double> w(static_cast<size_t>(fan_in * fan_out));
    for (auto& v : w) v = rng.uniform(-limit, limit);
    net.params.push_back(Tensor::from_vector({fan_out, fan_in}, std::move(w)));
    net.params.push_back(Tensor::zeros({fan_out}));
  }
  return net;
}

Tensor mlp_forward(std::span<const Tensor> params, const Tensor& in) {
  if (params.size() < 2 || params.size() % 2 != 0)
    throw std::invalid_argument("mlp_forward: params must be (W, b) pairs");
  Tensor h = in;
  for (size_t l = 0; l < params.size(); l += 2) {
    const Tensor& w = params[l];
    const Tensor& b = params[l + 1];
    Tensor z = add(reshape(matmul(w, reshape(h, {w.extent(1), 1})), {w.extent(0)}), b);
    h = (l + 2 < params.size()) ? softplus(z) : z;
  }
  return h;
}

Tensor reflect(const Tensor& d, const Tensor& nhat) {
  return sub(d, mul(nhat, mul(sum(mul(d, nhat)), 2.0)));
}

Tensor trace_ray(std::span<const Tensor> surface_params, const Tensor& origin, const Tensor& dir,
                 const Tensor& target, double plane_z, const SolverConfig& rootcfg,
                 std::array<double, 6>* hits) {
  const Tensor o = origin.detach();
  const Tensor d = dir.detach();
  if (o.shape() != Shape{3} || d.shape() != Shape{3})
    throw ShapeError("trace_ray: origin and dir must be 3-vectors");
  std::vector<Tensor> params(surface_params.begin(), surface_params.end());

  // Start from the intersection with z = 0, where the mirror sits; a ray
  // running parallel to that plane starts from its closest approach to the
  // origin instead.
  const auto ov = o.data();
  const auto dv = d.data();
  double s0;
  if (std::abs(dv[2]) > 1e-9) {
    s0 = -ov[2] / dv[2];
  } else {
    const double dd = dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2];
    s0 = -(ov[0] * dv[0] + ov[1] * dv[1] + ov[2] * dv[2]) / dd;
  }

  // Broyden opens with an identity inverse-Jacobian estimate, so hand it a
  // residual whose slope along s is positive at the start: probe the gap
  // g(s) = z(s) - mlp(x(s), y(s)) at two points and flip its sign if needed.
  auto gap = [&](double sv) {
    NoGradGuard off;
    Tensor p = add(o, mul(d, sv));
    Tensor zs = mlp_forward(params, slice(p, 0, 0, 2));
    return p.data()[2] - zs.data()[0];
  };
  const double probe_h = 1e-4 * std::max(1.0, std::abs(s0));
  const double sgn = gap(s0 + probe_h) >= gap(s0) ? 1.0 : -1.0;

  // Intersection parameter of p(s) = o + s d with the surface z = mlp(x, y).
  TensorFn resid = [o, d, sgn](std::span<const Tensor> in) -> Tensor {
    Tensor p = add(o, mul(d, in[0]));
    Tensor zs = mlp_forward(in.subspan(1), slice(p, 0, 0, 2));
    return mul(sub(reshape(index(p, 2), {1}), zs), sgn);
  };
  Tensor s = optimize::rootfinder(resid, Tensor::from_vector({1}, {s0}), params, rootcfg);
  if (!(s.data()[0] > 1e-9))
    throw SolverError("trace_ray: surface intersection behind the source", s.data()[0]);

  // The normal needs dz/d(x,y) at the hit point as a differentiable value, so
  // the tape must be live even when the caller only wants plain numbers.
  GradModeGuard tape(true);
  Tensor q = add(o, mul(d, s));
  Tensor xy = alias(slice(q, 0, 0, 2));
  Tensor gxy = grad1(sum(mlp_forward(params, xy)), xy, {.create_graph = true});
  Tensor nvec = concat({gxy, Tensor::from_vector({1}, {-1.0})}, 0);
  Tensor nhat = div(nvec, sqrt(sum(mul(nvec, nvec))));
  Tensor dref = reflect(d, nhat);

  const double reach = (plane_z - q.data()[2]) / dref.data()[2];
  if (!std::isfinite(reach) || reach <= 1e-9)
    throw SolverError("trace_ray: reflected ray misses the detector plane", dref.data()[2]);
  Tensor span_t = div(sub(plane_z, index(q, 2)), index(dref, 2));
  Tensor hit = add(q, mul(dref, span_t));
  if (hits) {
    const auto qd = q.data();
    const auto hd = hit.data();
    *hits = {qd[0], qd[1], qd[2], hd[0], hd[1], hd[2]};
  }
  Tensor dev = sub(hit, target.detach());
  return sum(mul(dev, dev));
}

Tensor md_force(const Tensor& positions, const Tensor& a) {
  if (positions.rank() != 2 || positions.extent(1) != 2)
    throw ShapeError("md_force: positions must be {n, 2}, got " + shape_str(positions.shape()));
  const std::int64_t n = positions.extent(0);
  Tensor pi = reshape(positions, {n, 1, 2});
  Tensor pj = reshape(positions, {1, n, 2});
  Tensor r = sub(pi, pj);                   // r_ij = p_i - p_j, {n, n, 2}
  Tensor d2 = sum_axis(mul(r, r), 2);       // squared separations, {n, n}
  // Pin the i == j diagonal: r is zero there, so dividing by 1 keeps the
  // self-term exactly zero instead of 0/0.
  std::vector<double> eye(static_cast<size_t>(n * n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) eye[static_cast<size_t>(i * n + i)] = 1.0;
  Tensor denom = mul(sqrt(add(d2, a)), sqrt(add(d2, Tensor::from_vector({n, n}, std::move(eye)))));
  return neg(sum_axis(div(r, reshape(denom, {n, n, 1})), 1));
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path) {
  for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << "\n";
}

void CsvWriter::row(std::span<const double> values) {
  for (size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_g17(values[i]);
  out_ << "\n";
}

std::vector<std::array<double, 2>> read_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open target csv: " + path);
  std::vector<std::array<double, 2>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;  // header
    std::istringstream ss(line);
    std::array<double, 2> xy{};
    char comma = 0;
    if (!(ss >> xy[0] >> comma >> xy[1]) || comma != ',')
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected x,y");
    rows.push_back(xy);
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  return rows;
}

}  // namespace demos
