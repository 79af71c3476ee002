#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "diffnum/autograd.hpp"
#include "diffnum/tensor.hpp"

namespace diffnum::linop {

/// Structural facts a caller can assert about an operator; solvers use them to
/// pick factorizations (e.g. Cholesky / CG for symmetric positive definite).
struct Hints {
  bool symmetric = false;
  bool positive_definite = false;
};

/// Matrix-free linear map defined by a matvec over (x, params...). The adjoint
/// map is derived from the matvec's VJP unless an explicit rmatvec is given.
/// Operators are immutable; with_params/transpose return rebound views.
class LinearOperator {
 public:
  using Hints = linop::Hints;

  LinearOperator() = default;
  LinearOperator(std::int64_t rows, std::int64_t cols, TensorFn matvec,
                 std::vector<Tensor> params = {}, TensorFn rmatvec = nullptr, Hints hints = {});

  static LinearOperator identity(std::int64_t n);
  /// Wraps a dense matrix; the matrix itself is the operator's parameter.
  static LinearOperator from_dense(const Tensor& a, Hints hints = {});

  bool defined() const { return impl_ != nullptr; }
  std::int64_t rows() const;
  std::int64_t cols() const;
  const std::vector<Tensor>& params() const;
  bool symmetric() const;
  bool positive_definite() const;
  bool is_identity() const;

  /// Same operator with the parameter list replaced (same arity).
  LinearOperator with_params(std::vector<Tensor> params) const;
  LinearOperator transpose() const;

  Tensor mv(const Tensor& x) const;
  /// A^T q via the matvec VJP (adjoint trick), or the explicit rmatvec.
  Tensor rmv(const Tensor& q) const;
  /// Column-batched matvec: X is cols x m.
  Tensor mm(const Tensor& x) const;
  /// Dense rows x cols matrix assembled by matvec against basis vectors.
  Tensor materialize() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  bool transposed_ = false;
};

struct LinopReport {
  bool passed = true;
  double max_additivity_err = 0.0;
  double max_homogeneity_err = 0.0;
  double max_adjoint_err = 0.0;
  std::string summary() const;
};

/// Verifies additivity, homogeneity, and adjoint consistency on random probe
/// pairs; violations are relative to the probe magnitudes.
LinopReport check_linop(const LinearOperator& a, int probes = 20, std::uint64_t seed = 0,
                        double threshold = 1e-10);

/// Gradient of sum(cot ⊙ A·X) with respect to A's parameters, recorded for
/// re-taping. Node-less parameters are promoted to local leaves.
std::vector<Tensor> params_vjp(const LinearOperator& a, const Tensor& x, const Tensor& cot);

}  // namespace diffnum::linop
