#include "diffnum/optimize/rootfinder.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "diffnum/errors.hpp"
#include "diffnum/linop/linear_operator.hpp"
#include "diffnum/linop/solve.hpp"
#include "diffnum/ops.hpp"

namespace diffnum::optimize {
namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> matvec(const std::vector<double>& h, const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += h[i * n + j] * v[j];
    out[i] = acc;
  }
  return out;
}

}  // namespace

Tensor rootfinder(const TensorFn& f, const Tensor& y0, std::span<const Tensor> params,
                  const SolverConfig& cfg) {
  cfg.validate();
  if (!y0.defined()) throw std::invalid_argument("rootfinder: y0 is undefined");
  const Shape yshape = y0.shape();
  const std::size_t n = static_cast<std::size_t>(y0.numel());

  // The iteration runs on plain values; parameters enter the graph only
  // through the node recorded at the end.
  std::vector<Tensor> pv(params.begin(), params.end());
  for (auto& p : pv) p = p.detach();

  auto eval = [&](const std::vector<double>& yv) -> std::vector<double> {
    NoGradGuard off;
    std::vector<Tensor> args;
    args.reserve(pv.size() + 1);
    args.push_back(Tensor::from_vector(yshape, yv));
    for (const auto& p : pv) args.push_back(p);
    Tensor r = f(args);
    if (r.shape() != yshape)
      throw ShapeError("rootfinder: residual shape " + shape_str(r.shape()) +
                       " does not match y shape " + shape_str(yshape));
    return std::vector<double>(r.data().begin(), r.data().end());
  };

  std::vector<double> y(y0.data().begin(), y0.data().end());
  std::vector<double> fy = eval(y);
  double res = inf_norm(fy);

  // Inverse-Jacobian estimate for Broyden's first method.
  std::vector<double> h(n * n, 0.0);
  auto reset_h = [&] {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
  };
  reset_h();
  bool fresh = true;  // no curvature information absorbed yet

  for (int it = 0; it < cfg.max_iter && res > cfg.tol; ++it) {
    std::vector<double> dy = matvec(h, fy);
    for (double& d : dy) d = -d;

    // Backtrack on the residual norm. A NaN from an out-of-domain trial
    // compares false against everything and simply shrinks the step.
    double alpha = cfg.damping;
    std::vector<double> ytrial(n);
    std::vector<double> ftrial;
    double rtrial = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) ytrial[i] = y[i] + alpha * dy[i];
      ftrial = eval(ytrial);
      rtrial = inf_norm(ftrial);
      if (rtrial < res * (1.0 - 1e-4 * alpha) || rtrial <= cfg.tol) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (fresh) break;  // stagnated even along the raw residual direction
      reset_h();
      fresh = true;
      continue;
    }

    // Broyden's first update H += (s - H df) s^T H / (s^T H df), built from
    // the H in force when the step was taken.
    std::vector<double> s(n), df(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ytrial[i] - y[i];
      df[i] = ftrial[i] - fy[i];
    }
    y = std::move(ytrial);
    fy = std::move(ftrial);
    res = rtrial;
    if (res <= cfg.tol) break;

    std::vector<double> hdf = matvec(h, df);
    double denom = 0.0, smag = 0.0, hmag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      denom += s[i] * hdf[i];
      smag += s[i] * s[i];
      hmag += hdf[i] * hdf[i];
    }
    if (std::abs(denom) <= 1e-12 * std::sqrt(smag * hmag) + 1e-300) {
      reset_h();  // update direction carries no usable information
      fresh = true;
      continue;
    }
    std::vector<double> sth(n, 0.0);  // row vector s^T H
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sth[j] += s[i] * h[i * n + j];
    for (std::size_t i = 0; i < n; ++i) {
      const double num = s[i] - hdf[i];
      for (std::size_t j = 0; j < n; ++j) h[i * n + j] += num * sth[j] / denom;
    }
    fresh = false;
  }

  if (!(res <= cfg.tol))
    throw SolverError("rootfinder did not converge within the iteration budget", res);

  Tensor root = Tensor::from_vector(yshape, std::move(y));

  SolverConfig bcfg = cfg;
  bcfg.method = "auto";  // the adjoint system picks its own linear solver

  TensorFn fn = f;
  auto jt_mv = [fn, yshape](std::span<const Tensor> in) -> Tensor {
    // in[0] is the vector being multiplied; in[1] the root; the rest are the
    // parameters. J^T v is the VJP of f in y at the root, so the operator's
    // derived adjoint (the plain JVP) gives J v for free.
    const bool outer = grad_mode_enabled();
    GradModeGuard tape(true);
    Tensor yt = alias(in[1]);
    std::vector<Tensor> args;
    args.reserve(in.size() - 1);
    args.push_back(yt);
    for (std::size_t i = 2; i < in.size(); ++i) args.push_back(in[i]);
    Tensor fy = fn(args);
    Tensor ip = sum(mul(fy, reshape(in[0], yshape)));
    return flatten(grad1(ip, yt, {.create_graph = outer}));
  };

  auto backward = [fn, jt_mv, bcfg, yshape, n](const std::vector<Tensor>& outs,
                                               const std::vector<Tensor>& cots,
                                               const std::vector<Tensor>& par) -> std::vector<Tensor> {
    const Tensor& yhat = outs[0];
    const Tensor& gy = cots[0];
    const bool outer = grad_mode_enabled();

    std::vector<Tensor> opparams;
    opparams.reserve(par.size() + 1);
    opparams.push_back(yhat);
    for (const auto& p : par) opparams.push_back(p);
    linop::LinearOperator jt(static_cast<std::int64_t>(n), static_cast<std::int64_t>(n),
                             jt_mv, opparams);
    Tensor hvec = linop::solve(jt, flatten(gy), {}, {}, bcfg);

    // Explicit parameter dependence: dtheta = <df/dtheta, -h> at the fixed
    // root. Aliasing makes theta the target while yhat enters as a value, and
    // keeps everything differentiable for the second-order sweep.
    GradModeGuard tape(true);
    std::vector<Tensor> pa(par.size());
    for (std::size_t i = 0; i < par.size(); ++i) pa[i] = alias(par[i]);
    std::vector<Tensor> args;
    args.reserve(par.size() + 1);
    args.push_back(yhat);
    for (const auto& p : pa) args.push_back(p);
    Tensor fy = fn(args);
    Tensor ip = sum(mul(fy, reshape(neg(hvec), yshape)));
    return grad(ip, pa, {.create_graph = outer});
  };

  std::vector<Tensor> parents(params.begin(), params.end());
  return make_op("rootfinder", std::move(parents), yshape, root.buffer(), backward);
}

Tensor equilibrium(const TensorFn& g, const Tensor& y0, std::span<const Tensor> params,
                   const SolverConfig& cfg) {
  TensorFn f = [g](std::span<const Tensor> in) -> Tensor { return sub(in[0], g(in)); };
  return rootfinder(f, y0, params, cfg);
}

}  // namespace diffnum::optimize
