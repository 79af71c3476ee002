#pragma once

#include <span>

#include "diffnum/autograd.hpp"
#include "diffnum/config.hpp"
#include "diffnum/tensor.hpp"

namespace diffnum::integrate {

/// Definite integral of f over [t0, t1]. f receives [t, params...] with t a
/// scalar and may return a tensor of any (fixed) shape; the integral is taken
/// elementwise. Composite 8-point Gauss-Legendre panels, bisected adaptively
/// until the local error estimate meets cfg.tol (cfg.panels > 0 instead fixes
/// that many uniform panels and skips adaptivity; cfg.max_steps caps the
/// panel count).
///
/// Differentiable to any order w.r.t. t0, t1, and params: the VJP
/// differentiates the quadrature sum itself on the frozen node set, so
/// parameter gradients are the same-node quadrature of df/dparam and bound
/// gradients are the Leibniz terms up to quadrature error.
Tensor quad(const TensorFn& f, const Tensor& t0, const Tensor& t1,
            std::span<const Tensor> params = {}, const SolverConfig& cfg = {});

}  // namespace diffnum::integrate
