#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace diffnum::detail {

using MatVec = std::function<std::vector<double>(const std::vector<double>&)>;

/// Conjugate gradient for SPD systems; returns x with ||Ax-b|| <= tol*||b||.
/// Throws SolverError (carrying the residual) on non-convergence.
std::vector<double> cg(const MatVec& av, const std::vector<double>& b, double tol, int max_iter);

/// Full-memory GMRES (modified Gram-Schmidt + Givens rotations), no restarts.
std::vector<double> gmres(const MatVec& av, const std::vector<double>& b, double tol,
                          int max_iter);

/// Block Lanczos with full reorthogonalization for a symmetric operator:
/// the m lowest (or uppermost) eigenpairs. vals come out ascending; vecs is
/// n x m row-major with eigenvectors in columns.
void lanczos_eigh(const MatVec& av, int n, int m, bool lowest, double tol, int max_basis,
                  std::uint64_t seed, std::vector<double>& vals, std::vector<double>& vecs);

}  // namespace diffnum::detail
