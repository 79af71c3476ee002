#pragma once

#include <cstdint>
#include <vector>

namespace diffnum::detail {

// Plain double-buffer routines (row-major, no AD) backing the dense forward
// paths of the linear-algebra functionals.

struct LuFactors {
  std::vector<double> lu;  // packed L\U, n x n
  std::vector<int> piv;
  int n = 0;
};

/// Partial-pivot LU. Throws SolverError on a (numerically) singular matrix.
LuFactors lu_factor(std::vector<double> a, int n);

/// Solves in place for `nrhs` right-hand sides stored as an n x nrhs matrix.
void lu_solve(const LuFactors& f, std::vector<double>& b, int nrhs);

/// Lower-triangular Cholesky factor. Throws SolverError if not SPD.
std::vector<double> cholesky(std::vector<double> a, int n);

void chol_solve(const std::vector<double>& L, int n, std::vector<double>& b, int nrhs);

/// Cyclic Jacobi eigensolver for a symmetric matrix: eigenvalues ascending,
/// eigenvectors as columns of `vecs` (n x n).
void jacobi_eigh(std::vector<double> a, int n, std::vector<double>& vals,
                 std::vector<double>& vecs);

}  // namespace diffnum::detail
