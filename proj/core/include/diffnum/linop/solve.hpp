#pragma once

#include "diffnum/config.hpp"
#include "diffnum/linop/linear_operator.hpp"

namespace diffnum::linop {

/// Solves A X - M X diag(E) = B for X, differentiable with respect to B, E and
/// the parameters of A and M.
///
/// B may be an n-vector or n x m matrix (X matches). E defaults to zeros
/// (plain A X = B), M to the identity. Forward method: dense factorization for
/// n <= 128 (Cholesky when A is flagged positive definite and the system is
/// unshifted, LU otherwise), conjugate gradient / GMRES above; cfg.method in
/// {"auto", "dense", "cg", "gmres"} overrides.
Tensor solve(const LinearOperator& a, const Tensor& b, const Tensor& e = {},
             const LinearOperator& m = {}, const SolverConfig& cfg = {});

}  // namespace diffnum::linop
