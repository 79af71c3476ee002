#pragma once

#include <span>
#include <vector>

#include "diffnum/autograd.hpp"
#include "diffnum/config.hpp"
#include "diffnum/tensor.hpp"

namespace diffnum::integrate {

/// Integrates dy/dt = f(t, y, params...) from t0 to t1 (either direction) and
/// returns y(t1). f receives [t, y, params...] with t a scalar and must
/// return a tensor of y's shape. Forward method: adaptive Dormand-Prince
/// RK4(5) with PI step-size control, tolerances cfg.rtol / cfg.atol, at most
/// cfg.max_steps accepted steps.
///
/// Gradients w.r.t. y0, t0, t1, and params come from the adjoint method: the
/// VJP integrates [y, a, s] backward from t1 with da/dt = -(df/dy)^T a and
/// ds/dt = -(df/dparam)^T a, reconstructing the trajectory instead of storing
/// it. The adjoint pass is first-order: its outputs are plain values, so
/// second derivatives through solve_ivp vanish.
Tensor solve_ivp(const TensorFn& f, const Tensor& y0, const Tensor& t0, const Tensor& t1,
                 std::span<const Tensor> params = {}, const SolverConfig& cfg = {});

/// Result of an integration that also reports intermediate states.
struct IvpSolution {
  Tensor y1;                      // y(t1), differentiable as in solve_ivp
  std::vector<Tensor> snapshots;  // y at each t_eval entry, detached values
};

/// solve_ivp variant recording y at each time in t_eval, which must lie
/// within [t0, t1] and be monotone in the direction of integration. The
/// snapshots are hit exactly (steps land on them) and carry no gradients.
IvpSolution solve_ivp_at(const TensorFn& f, const Tensor& y0, const Tensor& t0,
                         const Tensor& t1, std::span<const double> t_eval,
                         std::span<const Tensor> params = {}, const SolverConfig& cfg = {});

}  // namespace diffnum::integrate
