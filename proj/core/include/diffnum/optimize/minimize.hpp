#pragma once

#include <span>

#include "diffnum/autograd.hpp"
#include "diffnum/config.hpp"
#include "diffnum/tensor.hpp"

namespace diffnum::optimize {

/// Finds a local minimizer of the scalar objective f(y, params...) starting
/// from y0. cfg.method selects the iteration: "auto"/"gd" is gradient descent
/// with a backtracking (Armijo) line search, "newton" builds the dense
/// Hessian from Hessian-vector products and takes damped Newton steps.
/// Convergence means ||df/dy||_inf <= cfg.tol at the returned point.
///
/// The result is differentiable w.r.t. params through the stationarity
/// condition: dL/dtheta = -(dL/dy) H^{-1} (d2f/dy dtheta) at the minimizer.
/// The backward solve treats H as symmetric positive definite, so reaching a
/// saddle or maximizer surfaces as a SolverError there. y0 only selects the
/// basin; its gradient is zero.
///
/// Throws ShapeError when f is not scalar-valued and SolverError when the
/// iteration budget is exhausted (carrying the final gradient norm).
Tensor minimize(const TensorFn& f, const Tensor& y0,
                std::span<const Tensor> params = {}, const SolverConfig& cfg = {});

}  // namespace diffnum::optimize
