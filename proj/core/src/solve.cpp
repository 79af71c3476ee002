#include "diffnum/linop/solve.hpp"

#include <cmath>
#include <cstring>

#include "diffnum/detail/dense.hpp"
#include "diffnum/detail/krylov.hpp"
#include "diffnum/ops.hpp"

namespace diffnum::linop {

namespace {

constexpr std::int64_t kDenseLimit = 128;

std::vector<double> to_values(const Tensor& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

// Forward numeric solve of (A - e_j M) x_j = b_j per column, dense or Krylov.
std::vector<double> forward_solve(const LinearOperator& a, const LinearOperator& m,
                                  const std::vector<double>& bv, const std::vector<double>& ev,
                                  std::int64_t n, std::int64_t cols, const SolverConfig& cfg) {
  const bool dense = cfg.method == "dense" || (cfg.method == "auto" && n <= kDenseLimit);
  const auto ni = static_cast<int>(n);

  if (dense) {
    std::vector<double> ad = to_values(a.materialize());
    std::vector<double> md;
    if (!m.is_identity()) md = to_values(m.materialize());

    bool uniform_shift = true;
    for (double e : ev)
      if (e != ev[0]) uniform_shift = false;

    auto shifted = [&](double e) {
      std::vector<double> s = ad;
      if (e != 0.0) {
        if (md.empty()) {
          for (std::int64_t i = 0; i < n; ++i) s[static_cast<size_t>(i * n + i)] -= e;
        } else {
          for (size_t i = 0; i < s.size(); ++i) s[i] -= e * md[i];
        }
      }
      return s;
    };

    if (uniform_shift) {
      std::vector<double> x = bv;  // n x cols, row-major: exactly lu_solve's layout
      if (a.positive_definite() && ev[0] == 0.0 && m.is_identity()) {
        auto L = detail::cholesky(shifted(0.0), ni);
        detail::chol_solve(L, ni, x, static_cast<int>(cols));
      } else {
        auto f = detail::lu_factor(shifted(ev[0]), ni);
        detail::lu_solve(f, x, static_cast<int>(cols));
      }
      return x;
    }
    std::vector<double> x(bv.size());
    for (std::int64_t j = 0; j < cols; ++j) {
      auto f = detail::lu_factor(shifted(ev[static_cast<size_t>(j)]), ni);
      std::vector<double> col(static_cast<size_t>(n));
      for (std::int64_t i = 0; i < n; ++i) col[static_cast<size_t>(i)] = bv[static_cast<size_t>(i * cols + j)];
      detail::lu_solve(f, col, 1);
      for (std::int64_t i = 0; i < n; ++i) x[static_cast<size_t>(i * cols + j)] = col[static_cast<size_t>(i)];
    }
    return x;
  }

  // Matrix-free path, column by column.
  std::vector<double> x(bv.size());
  for (std::int64_t j = 0; j < cols; ++j) {
    const double e = ev[static_cast<size_t>(j)];
    detail::MatVec av = [&](const std::vector<double>& v) {
      NoGradGuard ng;
      Tensor vt = Tensor::from_vector({n}, v);
      Tensor y = a.mv(vt);
      if (e != 0.0) y = sub(y, mul(m.mv(vt), e));
      return to_values(y);
    };
    std::vector<double> col(static_cast<size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) col[static_cast<size_t>(i)] = bv[static_cast<size_t>(i * cols + j)];
    const bool use_cg = cfg.method == "cg" ||
                        (cfg.method == "auto" && a.positive_definite() && e == 0.0 &&
                         m.is_identity());
    std::vector<double> sol = use_cg ? detail::cg(av, col, cfg.tol, cfg.max_iter)
                                     : detail::gmres(av, col, cfg.tol, cfg.max_iter);
    for (std::int64_t i = 0; i < n; ++i) x[static_cast<size_t>(i * cols + j)] = sol[static_cast<size_t>(i)];
  }
  return x;
}

void check_residual(const LinearOperator& a, const LinearOperator& m, const Tensor& x,
                    const Tensor& b, const Tensor& e, double tol) {
  Tensor r = sub(a.mm(x), b);
  if (m.is_identity())
    r = sub(r, mul(x, e));
  else
    r = sub(r, mul(m.mm(x), e));
  const std::int64_t n = x.extent(0), cols = x.extent(1);
  for (std::int64_t j = 0; j < cols; ++j) {
    double rn = 0.0, bn = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      rn += r.at(i * cols + j) * r.at(i * cols + j);
      bn += b.at(i * cols + j) * b.at(i * cols + j);
    }
    rn = std::sqrt(rn);
    bn = std::sqrt(bn);
    // Headroom over cfg.tol: dense factorizations meet it easily, Krylov stops
    // exactly at tol and rounding can sit a hair above.
    if (!(rn <= 4.0 * tol * std::max(bn, 1.0)))
      throw SolverError("solve residual " + std::to_string(rn) + " exceeds tolerance on column " +
                            std::to_string(j),
                        rn);
  }
}

}  // namespace

Tensor solve(const LinearOperator& a, const Tensor& b, const Tensor& e, const LinearOperator& m,
             const SolverConfig& cfg) {
  cfg.validate();
  if (!a.defined()) throw ShapeError("solve: operator A is undefined");
  if (a.rows() != a.cols())
    throw ShapeError("solve: A must be square, got " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()));
  const std::int64_t n = a.rows();

  if (b.rank() == 1) {
    Tensor x = solve(a, reshape(b, {n, 1}), e, m, cfg);
    return flatten(x);
  }
  if (b.rank() != 2 || b.extent(0) != n)
    throw ShapeError("solve: B shape " + shape_str(b.shape()) + " does not match A (" +
                     std::to_string(n) + "x" + std::to_string(n) + ")");
  const std::int64_t cols = b.extent(1);

  LinearOperator mm_op = m.defined() ? m : LinearOperator::identity(n);
  if (mm_op.rows() != n || mm_op.cols() != n)
    throw ShapeError("solve: M must match A's shape");
  Tensor ee = e.defined() ? e : Tensor::zeros({cols});
  if (ee.rank() != 1 || ee.extent(0) != cols)
    throw ShapeError("solve: E shape " + shape_str(ee.shape()) + " must be [" +
                     std::to_string(cols) + "]");

  std::vector<double> xv;
  {
    NoGradGuard ng;
    xv = forward_solve(a, mm_op, to_values(b), to_values(ee), n, cols, cfg);
    Tensor xt = Tensor::from_vector({n, cols}, xv);
    check_residual(a, mm_op, xt, b, ee, cfg.tol);
  }

  std::vector<Tensor> parents{b, ee};
  parents.insert(parents.end(), a.params().begin(), a.params().end());
  parents.insert(parents.end(), mm_op.params().begin(), mm_op.params().end());

  auto backward = [a, mm_op, cfg](const std::vector<Tensor>& outputs,
                                  const std::vector<Tensor>& cots,
                                  const std::vector<Tensor>& parents) -> std::vector<Tensor> {
    const Tensor& x = outputs[0];
    const Tensor& gx = cots[0];
    const Tensor& ep = parents[1];

    // Appendix-style adjoint: G solves the transposed system A^T G - M^T G E = dL/dX.
    Tensor g = solve(a.transpose(), gx, ep, mm_op.transpose(), cfg);

    Tensor mx = mm_op.is_identity() ? x : mm_op.mm(x);
    Tensor de = sum_axis(mul(g, mx), 0);

    std::vector<Tensor> grads{g, de};
    auto da = params_vjp(a, x, neg(g));
    grads.insert(grads.end(), da.begin(), da.end());
    if (!mm_op.params().empty()) {
      auto dm = params_vjp(mm_op, mul(x, ep), g);
      grads.insert(grads.end(), dm.begin(), dm.end());
    }
    return grads;
  };

  return make_op("solve", std::move(parents), {n, cols},
                 std::make_shared<const std::vector<double>>(std::move(xv)), std::move(backward));
}

}  // namespace diffnum::linop
