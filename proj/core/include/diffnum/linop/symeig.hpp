#pragma once

#include "diffnum/config.hpp"
#include "diffnum/linop/linear_operator.hpp"

namespace diffnum::linop {

enum class EigMode { lowest, uppermost };

struct EigResult {
  Tensor eigenvalues;   // m entries, ascending
  Tensor eigenvectors;  // n x m, columns M-orthonormal, largest-|entry| positive
};

/// m lowest or uppermost eigenpairs of the symmetric pencil (A, M), M positive
/// definite (identity when omitted). Differentiable with respect to the
/// operators' parameters; eigenvector derivatives require a non-degenerate
/// spectrum. Forward method: dense Jacobi for n <= 128 or when M is a real mass
/// matrix, block Lanczos with full reorthogonalization above (M = identity
/// only); cfg.method in {"auto", "dense", "lanczos"}.
EigResult symeig(const LinearOperator& a, std::int64_t m, EigMode mode = EigMode::lowest,
                 const LinearOperator& mass = {}, const SolverConfig& cfg = {});

}  // namespace diffnum::linop
