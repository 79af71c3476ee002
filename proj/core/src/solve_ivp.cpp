#include "diffnum/integrate/solve_ivp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "diffnum/errors.hpp"
#include "diffnum/ops.hpp"

namespace diffnum::integrate {
namespace {

using OdeFn = std::function<std::vector<double>(double, const std::vector<double>&)>;

// Dormand-Prince 4(5) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
// Fifth-minus-fourth-order error weights (k2 drops out).
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

// Adaptive RK45 from t0 to t1 (either direction). `landings` must be monotone
// along the direction and inside [t0, t1]; the state at each landing is
// appended to *snaps. Throws SolverError on step underflow, non-finite
// states, or an exhausted step budget.
std::vector<double> rk45(const OdeFn& fode, std::vector<double> y, double t0, double t1,
                         double rtol, double atol, int max_steps,
                         const std::vector<double>& landings,
                         std::vector<std::vector<double>>* snaps) {
  const std::size_t n = y.size();
  std::size_t next_land = 0;
  double t = t0;
  auto emit_due = [&] {
    while (next_land < landings.size() && landings[next_land] == t) {
      snaps->push_back(y);
      ++next_land;
    }
  };
  if (snaps) emit_due();
  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;

  std::vector<double> k1 = fode(t, y), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  std::vector<double> ytmp(n), y5(n);
  double h = (t1 - t0) / 100.0;
  double err_prev = 1.0;
  int steps = 0;

  while (dir * (t1 - t) > 0.0) {
    if (++steps > max_steps)
      throw SolverError("solve_ivp exceeded the step budget", dir * (t1 - t));
    if (std::abs(h) <= 1e-14 * std::max(1.0, std::abs(t)))
      throw SolverError("solve_ivp step size underflow", std::abs(h));

    // Cap the step to land exactly on the next snapshot time or t1.
    const double target =
        (snaps && next_land < landings.size()) ? landings[next_land] : t1;
    double hs = h;
    bool hit = false;
    if (dir * (t + hs - target) >= 0.0) {
      hs = target - t;
      hit = true;
    }

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * kA21 * k1[i];
    k2 = fode(t + kC2 * hs, ytmp);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (kA31 * k1[i] + kA32 * k2[i]);
    k3 = fode(t + kC3 * hs, ytmp);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
    k4 = fode(t + kC4 * hs, ytmp);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
    k5 = fode(t + kC5 * hs, ytmp);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] + kA64 * k4[i] +
                             kA65 * k5[i]);
    k6 = fode(t + hs, ytmp);
    for (std::size_t i = 0; i < n; ++i)
      y5[i] = y[i] + hs * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] + kB5 * k5[i] + kB6 * k6[i]);
    k7 = fode(t + hs, y5);

    double errsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = hs * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                             kE6 * k6[i] + kE7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      errsq += (e / sc) * (e / sc);
    }
    const double errnorm = std::sqrt(errsq / static_cast<double>(n));

    if (!std::isfinite(errnorm)) {
      h *= 0.25;  // blown-up trial state; retreat hard
      err_prev = 1.0;
      continue;
    }
    if (errnorm <= 1.0) {
      t = hit ? target : t + hs;
      y = y5;
      k1 = k7;
      if (snaps) emit_due();
      // PI controller (accepted step): grow by the current error with a
      // damping term from the previous one.
      const double e1 = std::pow(std::max(errnorm, 1e-10), -0.7 / 5.0);
      const double e2 = std::pow(std::max(err_prev, 1e-10), 0.4 / 5.0);
      h *= std::clamp(0.9 * e1 * e2, 0.2, 10.0);
      err_prev = errnorm;
    } else {
      h *= std::clamp(0.9 * std::pow(errnorm, -0.2), 0.1, 0.9);
    }
  }
  for (double v : y)
    if (!std::isfinite(v)) throw SolverError("solve_ivp met a non-finite state", v);
  return y;
}

}  // namespace

IvpSolution solve_ivp_at(const TensorFn& f, const Tensor& y0, const Tensor& t0,
                         const Tensor& t1, std::span<const double> t_eval,
                         std::span<const Tensor> params, const SolverConfig& cfg) {
  cfg.validate();
  if (!y0.defined()) throw std::invalid_argument("solve_ivp: y0 is undefined");
  if (!t0.defined() || !t1.defined() || !t0.is_scalar() || !t1.is_scalar())
    throw ShapeError("solve_ivp: bounds must be defined scalars");
  const Shape yshape = y0.shape();
  const std::size_t n = static_cast<std::size_t>(y0.numel());
  const double t0v = t0.item(), t1v = t1.item();

  std::vector<Tensor> pv(params.begin(), params.end());
  for (auto& p : pv) p = p.detach();

  auto fode = [&](double t, const std::vector<double>& yv) -> std::vector<double> {
    NoGradGuard off;
    std::vector<Tensor> args;
    args.reserve(pv.size() + 2);
    args.push_back(Tensor::scalar(t));
    args.push_back(Tensor::from_vector(yshape, yv));
    for (const auto& p : pv) args.push_back(p);
    Tensor d = f(args);
    if (d.shape() != yshape)
      throw ShapeError("solve_ivp: derivative shape " + shape_str(d.shape()) +
                       " does not match y shape " + shape_str(yshape));
    return std::vector<double>(d.data().begin(), d.data().end());
  };

  const double dir = t1v >= t0v ? 1.0 : -1.0;
  std::vector<double> evals(t_eval.begin(), t_eval.end());
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (dir * (evals[i] - t0v) < 0.0 || dir * (t1v - evals[i]) < 0.0)
      throw std::invalid_argument("solve_ivp: t_eval entry outside [t0, t1]");
    if (i > 0 && dir * (evals[i] - evals[i - 1]) < 0.0)
      throw std::invalid_argument("solve_ivp: t_eval must be monotone along the integration");
  }

  std::vector<std::vector<double>> snaps;
  std::vector<double> y1v =
      rk45(fode, std::vector<double>(y0.data().begin(), y0.data().end()), t0v, t1v,
           cfg.rtol, cfg.atol, cfg.max_steps, evals, &snaps);
  // Landings exactly at t1 are emitted after the loop finishes.
  while (snaps.size() < evals.size()) snaps.push_back(y1v);

  IvpSolution sol;
  sol.snapshots.reserve(snaps.size());
  for (auto& s : snaps) sol.snapshots.push_back(Tensor::from_vector(yshape, std::move(s)));

  TensorFn fn = f;
  SolverConfig bcfg = cfg;
  auto backward = [fn, yshape, n, bcfg, t0v, t1v](const std::vector<Tensor>& outs,
                                                  const std::vector<Tensor>& cots,
                                                  const std::vector<Tensor>& par) -> std::vector<Tensor> {
    const Tensor& gy = cots[0];
    // Parameter values, detached: the adjoint pass is numeric end to end.
    std::vector<Tensor> th;
    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    for (std::size_t i = 3; i < par.size(); ++i) {
      th.push_back(par[i].detach());
      sizes.push_back(static_cast<std::size_t>(par[i].numel()));
      total += sizes.back();
    }

    auto feval = [&](double t, const std::vector<double>& yv) -> std::vector<double> {
      NoGradGuard off;
      std::vector<Tensor> args;
      args.reserve(th.size() + 2);
      args.push_back(Tensor::scalar(t));
      args.push_back(Tensor::from_vector(yshape, yv));
      for (const auto& p : th) args.push_back(p);
      Tensor d = fn(args);
      return std::vector<double>(d.data().begin(), d.data().end());
    };

    // Augmented state z = [y, a, s]: the trajectory is reconstructed
    // alongside the adjoint instead of being stored.
    auto aug = [&](double t, const std::vector<double>& z) -> std::vector<double> {
      std::vector<double> yv(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
      GradModeGuard tape(true);
      Tensor yl = Tensor::from_vector(yshape, yv).leaf();
      std::vector<Tensor> wrt{yl};
      std::vector<Tensor> args;
      args.reserve(th.size() + 2);
      args.push_back(Tensor::scalar(t));
      args.push_back(yl);
      for (const auto& p : th) {
        wrt.push_back(p.leaf());
        args.push_back(wrt.back());
      }
      Tensor ft = fn(args);
      Tensor at = Tensor::from_vector(
          yshape, std::vector<double>(z.begin() + static_cast<std::ptrdiff_t>(n),
                                      z.begin() + static_cast<std::ptrdiff_t>(2 * n)));
      std::vector<Tensor> gs = grad(sum(mul(ft, at)), wrt);
      std::vector<double> dz(2 * n + total);
      for (std::size_t i = 0; i < n; ++i) dz[i] = ft.at(static_cast<std::int64_t>(i));
      for (std::size_t i = 0; i < n; ++i) dz[n + i] = -gs[0].at(static_cast<std::int64_t>(i));
      std::size_t off = 2 * n;
      for (std::size_t j = 0; j < th.size(); ++j)
        for (std::size_t i = 0; i < sizes[j]; ++i)
          dz[off++] = -gs[j + 1].at(static_cast<std::int64_t>(i));
      return dz;
    };

    std::vector<double> y1v2(outs[0].data().begin(), outs[0].data().end());
    std::vector<double> z1(2 * n + total, 0.0);
    std::copy(y1v2.begin(), y1v2.end(), z1.begin());
    std::copy(gy.data().begin(), gy.data().end(),
              z1.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> z0 =
        rk45(aug, std::move(z1), t1v, t0v, bcfg.rtol, bcfg.atol, bcfg.max_steps, {}, nullptr);

    std::vector<double> y0rec(z0.begin(), z0.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> a0(z0.begin() + static_cast<std::ptrdiff_t>(n),
                           z0.begin() + static_cast<std::ptrdiff_t>(2 * n));

    // Bound gradients: dL/dt1 = gy . f(t1, y1); dL/dt0 = -a(t0) . f(t0, y0).
    std::vector<double> f1 = feval(t1v, y1v2);
    std::vector<double> f0 = feval(t0v, y0rec);
    double dt1 = 0.0, dt0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dt1 += gy.at(static_cast<std::int64_t>(i)) * f1[i];
      dt0 -= a0[i] * f0[i];
    }

    std::vector<Tensor> results(par.size());
    results[0] = Tensor::from_vector(yshape, std::move(a0));
    results[1] = Tensor::scalar(dt0);
    results[2] = Tensor::scalar(dt1);
    std::size_t off = 2 * n;
    for (std::size_t j = 0; j < th.size(); ++j) {
      std::vector<double> gj(z0.begin() + static_cast<std::ptrdiff_t>(off),
                             z0.begin() + static_cast<std::ptrdiff_t>(off + sizes[j]));
      results[3 + j] = Tensor::from_vector(par[3 + j].shape(), std::move(gj));
      off += sizes[j];
    }
    return results;
  };

  std::vector<Tensor> parents;
  parents.reserve(params.size() + 3);
  parents.push_back(y0);
  parents.push_back(t0);
  parents.push_back(t1);
  for (const auto& p : params) parents.push_back(p);
  sol.y1 = make_op("solve_ivp", std::move(parents), yshape,
                   Tensor::from_vector(yshape, std::move(y1v)).buffer(), backward);
  return sol;
}

Tensor solve_ivp(const TensorFn& f, const Tensor& y0, const Tensor& t0, const Tensor& t1,
                 std::span<const Tensor> params, const SolverConfig& cfg) {
  return solve_ivp_at(f, y0, t0, t1, {}, params, cfg).y1;
}

}  // namespace diffnum::integrate
