#include "diffnum/optimize/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "diffnum/detail/dense.hpp"
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

}  // namespace

Tensor minimize(const TensorFn& f, const Tensor& y0, std::span<const Tensor> params,
                const SolverConfig& cfg) {
  cfg.validate();
  if (!y0.defined()) throw std::invalid_argument("minimize: y0 is undefined");
  if (cfg.method != "auto" && cfg.method != "gd" && cfg.method != "newton")
    throw std::invalid_argument("minimize: unknown method '" + cfg.method + "'");
  const bool newton = cfg.method == "newton";
  const Shape yshape = y0.shape();
  const std::size_t n = static_cast<std::size_t>(y0.numel());

  std::vector<Tensor> pv(params.begin(), params.end());
  for (auto& p : pv) p = p.detach();

  auto check_scalar = [](const Tensor& v) {
    if (!v.is_scalar())
      throw ShapeError("minimize: objective must be scalar, got shape " + shape_str(v.shape()));
  };

  // Objective value only, for line-search probes.
  auto value_at = [&](const std::vector<double>& yv) -> double {
    NoGradGuard off;
    std::vector<Tensor> args;
    args.reserve(pv.size() + 1);
    args.push_back(Tensor::from_vector(yshape, yv));
    for (const auto& p : pv) args.push_back(p);
    Tensor v = f(args);
    check_scalar(v);
    return v.item();
  };

  // Value and gradient; with `hess` also the dense Hessian, one
  // Hessian-vector product per column.
  auto derivs_at = [&](const std::vector<double>& yv, std::vector<double>& gout,
                       std::vector<double>* hess) -> double {
    GradModeGuard tape(true);
    Tensor yl = Tensor::from_vector(yshape, yv).leaf();
    std::vector<Tensor> args;
    args.reserve(pv.size() + 1);
    args.push_back(yl);
    for (const auto& p : pv) args.push_back(p);
    Tensor v = f(args);
    check_scalar(v);
    Tensor g = grad1(v, yl, {.create_graph = hess != nullptr});
    gout.assign(g.data().begin(), g.data().end());
    if (hess) {
      hess->assign(n * n, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> ej(n, 0.0);
        ej[j] = 1.0;
        Tensor hj = grad1(sum(mul(g, Tensor::from_vector(yshape, std::move(ej)))), yl);
        for (std::size_t i = 0; i < n; ++i) (*hess)[i * n + j] = hj.data()[i];
      }
    }
    return v.item();
  };

  std::vector<double> y(y0.data().begin(), y0.data().end());
  std::vector<double> g, hess;
  double fv = derivs_at(y, g, newton ? &hess : nullptr);
  double gnorm = inf_norm(g);

  for (int it = 0; it < cfg.max_iter && gnorm > cfg.tol; ++it) {
    std::vector<double> d(n);
    if (newton) {
      // Newton step from the dense Hessian; fall back to steepest descent
      // when the factorization fails or the step points uphill.
      try {
        auto lu = detail::lu_factor(hess, static_cast<int>(n));
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -g[i];
        detail::lu_solve(lu, rhs, 1);
        d = std::move(rhs);
      } catch (const SolverError&) {
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    }
    double gd = 0.0;
    for (std::size_t i = 0; i < n; ++i) gd += g[i] * d[i];
    if (!(gd < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      gd = 0.0;
      for (std::size_t i = 0; i < n; ++i) gd -= g[i] * g[i];
    }

    // Armijo backtracking; NaN objective values reject the step.
    double alpha = cfg.damping;
    std::vector<double> ytrial(n);
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) ytrial[i] = y[i] + alpha * d[i];
      const double ft = value_at(ytrial);
      if (ft <= fv + 1e-4 * alpha * gd) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no measurable progress along a descent direction

    y = std::move(ytrial);
    fv = derivs_at(y, g, newton ? &hess : nullptr);
    gnorm = inf_norm(g);
  }

  if (!(gnorm <= cfg.tol))
    throw SolverError("minimize did not converge within the iteration budget", gnorm);

  Tensor ymin = Tensor::from_vector(yshape, std::move(y));

  SolverConfig bcfg = cfg;
  bcfg.method = "auto";  // the stationarity system picks its own linear solver

  TensorFn fn = f;
  auto h_mv = [fn, yshape](std::span<const Tensor> in) -> Tensor {
    // in[0] is the vector being multiplied; in[1] the minimizer; the rest are
    // the parameters. H v is a Hessian-vector product: differentiate
    // <grad f, v> in y once more.
    const bool outer = grad_mode_enabled();
    GradModeGuard tape(true);
    Tensor yt = alias(in[1]);
    std::vector<Tensor> args;
    args.reserve(in.size() - 1);
    args.push_back(yt);
    for (std::size_t i = 2; i < in.size(); ++i) args.push_back(in[i]);
    Tensor v = fn(args);
    Tensor gv = grad1(v, yt, {.create_graph = true});
    Tensor ip = sum(mul(gv, reshape(in[0], yshape)));
    return flatten(grad1(ip, yt, {.create_graph = outer}));
  };

  auto backward = [fn, h_mv, bcfg, yshape, n](const std::vector<Tensor>& outs,
                                              const std::vector<Tensor>& cots,
                                              const std::vector<Tensor>& par) -> std::vector<Tensor> {
    const Tensor& yhat = outs[0];
    const Tensor& gy = cots[0];
    const bool outer = grad_mode_enabled();

    // The Hessian at the minimizer is symmetric and must be positive
    // definite; flagging it routes the solve through Cholesky / CG, which
    // turn an indefinite Hessian into a SolverError.
    std::vector<Tensor> opparams;
    opparams.reserve(par.size() + 1);
    opparams.push_back(yhat);
    for (const auto& p : par) opparams.push_back(p);
    linop::LinearOperator hop(static_cast<std::int64_t>(n), static_cast<std::int64_t>(n),
                              h_mv, opparams, nullptr,
                              {.symmetric = true, .positive_definite = true});
    Tensor hv = linop::solve(hop, flatten(gy), {}, {}, bcfg);

    // Explicit parameter dependence of the stationarity condition:
    // dtheta = <d(grad_y f)/dtheta, -h> at the fixed minimizer.
    GradModeGuard tape(true);
    std::vector<Tensor> pa(par.size());
    for (std::size_t i = 0; i < par.size(); ++i) pa[i] = alias(par[i]);
    Tensor yt = alias(yhat);
    std::vector<Tensor> args;
    args.reserve(par.size() + 1);
    args.push_back(yt);
    for (const auto& p : pa) args.push_back(p);
    Tensor v = fn(args);
    Tensor gvec = grad1(v, yt, {.create_graph = true});
    Tensor ip = sum(mul(gvec, reshape(neg(hv), yshape)));
    return grad(ip, pa, {.create_graph = outer});
  };

  std::vector<Tensor> parents(params.begin(), params.end());
  return make_op("minimize", std::move(parents), yshape, ymin.buffer(), backward);
}

}  // namespace diffnum::optimize
