#pragma once

#include <span>

#include "diffnum/autograd.hpp"
#include "diffnum/config.hpp"
#include "diffnum/tensor.hpp"

namespace diffnum::optimize {

/// Solves f(y, params...) = 0 for y, starting from y0. f receives [y,
/// params...] and must return a tensor of y's shape (the Jacobian is square
/// by construction). Iteration is Broyden's first method — an inverse-Jacobian
/// estimate updated rank-one per step — with a backtracking line search on
/// the residual norm; convergence means ||f||_inf <= cfg.tol.
///
/// The result is differentiable w.r.t. params through the implicit-function
/// VJP: dL/dtheta = -(dL/dy) J^{-1} (df/dtheta) evaluated at the root, with
/// J^T applied matrix-free. y0 only selects the root; its gradient is zero.
///
/// Throws ShapeError when f's output shape differs from y's, and SolverError
/// when the iteration budget is exhausted (carrying the final residual) or
/// the backward linear solve meets a singular Jacobian.
Tensor rootfinder(const TensorFn& f, const Tensor& y0,
                  std::span<const Tensor> params = {}, const SolverConfig& cfg = {});

/// Solves the fixed-point equation y = g(y, params...) by rootfinding on
/// f(y, params...) = y - g(y, params...). Same contract as rootfinder.
Tensor equilibrium(const TensorFn& g, const Tensor& y0,
                   std::span<const Tensor> params = {}, const SolverConfig& cfg = {});

}  // namespace diffnum::optimize
