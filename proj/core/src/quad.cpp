#include "diffnum/integrate/quad.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "diffnum/errors.hpp"
#include "diffnum/ops.hpp"

namespace diffnum::integrate {
namespace {

// 8-point Gauss-Legendre rule on [-1, 1]; mapped per panel below.
constexpr int kGlOrder = 8;
constexpr double kGx[kGlOrder] = {-0.9602898564975363, -0.7966664774136267,
                                  -0.5255324099163290, -0.1834346424956498,
                                  0.1834346424956498,  0.5255324099163290,
                                  0.7966664774136267,  0.9602898564975363};
constexpr double kGw[kGlOrder] = {0.1012285362903763, 0.2223810344533745,
                                  0.3137066458778873, 0.3626837833783620,
                                  0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};

// Fraction interval of [t0, t1] covered by one panel.
struct Panel {
  double a, b;
};

// The quadrature sum as a tensor expression over (t0, t1, params): running it
// on plain values is the forward pass, running it on aliased parents is the
// VJP's (re-differentiable) discretized integral.
Tensor build_sum(const TensorFn& f, const Tensor& t0, const Tensor& t1,
                 std::span<const Tensor> params, const std::vector<Panel>& panels,
                 const Shape& out_shape) {
  Tensor width = sub(t1, t0);
  std::vector<Tensor> args(params.size() + 1);
  for (std::size_t i = 0; i < params.size(); ++i) args[i + 1] = params[i];
  Tensor s = Tensor::zeros(out_shape);
  for (const Panel& p : panels) {
    Tensor base = add(t0, mul(width, p.a));
    Tensor pw = mul(width, p.b - p.a);
    for (int k = 0; k < kGlOrder; ++k) {
      args[0] = add(base, mul(pw, 0.5 * (1.0 + kGx[k])));
      Tensor fx = f(args);
      if (fx.shape() != out_shape)
        throw ShapeError("quad: integrand shape " + shape_str(fx.shape()) +
                         " changed from " + shape_str(out_shape));
      s = add(s, mul(fx, mul(pw, 0.5 * kGw[k])));
    }
  }
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Tensor quad(const TensorFn& f, const Tensor& t0, const Tensor& t1,
            std::span<const Tensor> params, const SolverConfig& cfg) {
  cfg.validate();
  if (!t0.defined() || !t1.defined() || !t0.is_scalar() || !t1.is_scalar())
    throw ShapeError("quad: bounds must be defined scalars");

  Tensor t0d = t0.detach(), t1d = t1.detach();
  std::vector<Tensor> pv(params.begin(), params.end());
  for (auto& p : pv) p = p.detach();

  // One probe evaluation fixes the integrand's shape.
  Shape oshape;
  {
    NoGradGuard off;
    std::vector<Tensor> args;
    args.reserve(pv.size() + 1);
    args.push_back(add(t0d, mul(sub(t1d, t0d), 0.5)));
    for (const auto& p : pv) args.push_back(p);
    oshape = f(args).shape();
  }

  auto panel_vals = [&](double a, double b) -> std::vector<double> {
    NoGradGuard off;
    Tensor v = build_sum(f, t0d, t1d, pv, {Panel{a, b}}, oshape);
    return std::vector<double>(v.data().begin(), v.data().end());
  };

  std::vector<Panel> panels;
  if (cfg.panels > 0) {
    panels.reserve(static_cast<std::size_t>(cfg.panels));
    for (int i = 0; i < cfg.panels; ++i)
      panels.push_back({static_cast<double>(i) / cfg.panels,
                        static_cast<double>(i + 1) / cfg.panels});
  } else {
    // Bisect until each panel's rule-vs-halves discrepancy fits its share of
    // the error budget.
    const double scale = std::max(1.0, max_abs(panel_vals(0.0, 1.0)));
    std::vector<Panel> todo{{0.0, 1.0}};
    while (!todo.empty()) {
      if (panels.size() + todo.size() > static_cast<std::size_t>(cfg.max_steps))
        throw SolverError("quad exceeded the subdivision budget",
                          static_cast<double>(panels.size()));
      Panel p = todo.back();
      todo.pop_back();
      const double mid = 0.5 * (p.a + p.b);
      if (!(p.b - p.a > 1e-12))
        throw SolverError("quad subdivision underflow", p.b - p.a);
      std::vector<double> whole = panel_vals(p.a, p.b);
      std::vector<double> left = panel_vals(p.a, mid);
      std::vector<double> right = panel_vals(mid, p.b);
      double diff = 0.0;
      for (std::size_t i = 0; i < whole.size(); ++i)
        diff = std::max(diff, std::abs(whole[i] - left[i] - right[i]));
      if (diff <= cfg.tol * (p.b - p.a) * scale) {
        panels.push_back(p);
      } else {
        todo.push_back({mid, p.b});
        todo.push_back({p.a, mid});
      }
    }
    std::sort(panels.begin(), panels.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
  }

  Tensor val;
  {
    NoGradGuard off;
    val = build_sum(f, t0d, t1d, pv, panels, oshape);
  }

  TensorFn fn = f;
  auto backward = [fn, panels, oshape](const std::vector<Tensor>&,
                                       const std::vector<Tensor>& cots,
                                       const std::vector<Tensor>& par) -> std::vector<Tensor> {
    const bool outer = grad_mode_enabled();
    GradModeGuard tape(true);
    std::vector<Tensor> targets(par.size());
    for (std::size_t i = 0; i < par.size(); ++i) targets[i] = alias(par[i]);
    Tensor s = build_sum(fn, targets[0], targets[1],
                         std::span<const Tensor>(targets).subspan(2), panels, oshape);
    Tensor ip = sum(mul(s, cots[0]));
    return grad(ip, targets, {.create_graph = outer});
  };

  std::vector<Tensor> parents;
  parents.reserve(params.size() + 2);
  parents.push_back(t0);
  parents.push_back(t1);
  for (const auto& p : params) parents.push_back(p);
  return make_op("quad", std::move(parents), oshape, val.buffer(), backward);
}

}  // namespace diffnum::integrate
