#include "diffnum/linop/symeig.hpp"

#include <algorithm>
#include <cmath>

#include "diffnum/detail/dense.hpp"
#include "diffnum/detail/krylov.hpp"
#include "diffnum/linop/solve.hpp"
#include "diffnum/ops.hpp"

namespace diffnum::linop {

namespace {

constexpr std::int64_t kDenseLimit = 128;

std::vector<double> to_values(const Tensor& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

// X <- L^-1 X and X <- L^-T X for lower-triangular L, X is n x k row-major.
void lower_solve(const std::vector<double>& L, int n, std::vector<double>& x, int k) {
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < i; ++r) {
      const double m = L[static_cast<size_t>(i * n + r)];
      for (int j = 0; j < k; ++j) x[static_cast<size_t>(i * k + j)] -= m * x[static_cast<size_t>(r * k + j)];
    }
    const double d = L[static_cast<size_t>(i * n + i)];
    for (int j = 0; j < k; ++j) x[static_cast<size_t>(i * k + j)] /= d;
  }
}

void lower_t_solve(const std::vector<double>& L, int n, std::vector<double>& x, int k) {
  for (int i = n - 1; i >= 0; --i) {
    for (int r = i + 1; r < n; ++r) {
      const double m = L[static_cast<size_t>(r * n + i)];
      for (int j = 0; j < k; ++j) x[static_cast<size_t>(i * k + j)] -= m * x[static_cast<size_t>(r * k + j)];
    }
    const double d = L[static_cast<size_t>(i * n + i)];
    for (int j = 0; j < k; ++j) x[static_cast<size_t>(i * k + j)] /= d;
  }
}

std::vector<double> transposed(const std::vector<double>& a, int rows, int cols) {
  std::vector<double> t(a.size());
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t[static_cast<size_t>(j * rows + i)] = a[static_cast<size_t>(i * cols + j)];
  return t;
}

// Flip each column so its largest-magnitude entry is positive.
void fix_signs(std::vector<double>& u, std::int64_t n, std::int64_t m) {
  for (std::int64_t j = 0; j < m; ++j) {
    double best = 0.0;
    std::int64_t arg = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double v = std::abs(u[static_cast<size_t>(i * m + j)]);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    if (u[static_cast<size_t>(arg * m + j)] < 0.0)
      for (std::int64_t i = 0; i < n; ++i) u[static_cast<size_t>(i * m + j)] = -u[static_cast<size_t>(i * m + j)];
  }
}

}  // namespace

EigResult symeig(const LinearOperator& a, std::int64_t m, EigMode mode,
                 const LinearOperator& mass, const SolverConfig& cfg) {
  cfg.validate();
  if (!a.defined()) throw ShapeError("symeig: operator A is undefined");
  if (a.rows() != a.cols()) throw ShapeError("symeig: A must be square");
  const std::int64_t n = a.rows();
  if (m < 1 || m > n)
    throw ShapeError("symeig: requested " + std::to_string(m) + " pairs from an n=" +
                     std::to_string(n) + " operator");
  LinearOperator mop = mass.defined() ? mass : LinearOperator::identity(n);
  if (mop.rows() != n || mop.cols() != n) throw ShapeError("symeig: M must match A's shape");
  const bool general = !mop.is_identity();

  const bool dense = cfg.method == "dense" ||
                     (cfg.method != "lanczos" && (n <= kDenseLimit || general));

  std::vector<double> lam_v, u_v, spectrum;
  std::int64_t first = 0;  // index of the first selected pair within `spectrum`
  {
    NoGradGuard ng;
    const auto ni = static_cast<int>(n);
    if (dense) {
      std::vector<double> ad = to_values(a.materialize());
      std::vector<double> evals, evecs;
      std::vector<double> chol_l;
      if (general) {
        chol_l = detail::cholesky(to_values(mop.materialize()), ni);
        // C = L^-1 A L^-T, then U = L^-T W.
        std::vector<double> w = ad;
        lower_solve(chol_l, ni, w, ni);
        w = transposed(w, ni, ni);
        lower_solve(chol_l, ni, w, ni);
        detail::jacobi_eigh(w, ni, evals, evecs);
        lower_t_solve(chol_l, ni, evecs, ni);
      } else {
        detail::jacobi_eigh(ad, ni, evals, evecs);
      }
      spectrum = evals;
      first = mode == EigMode::lowest ? 0 : n - m;
      lam_v.assign(evals.begin() + first, evals.begin() + first + m);
      u_v.resize(static_cast<size_t>(n * m));
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < m; ++j)
          u_v[static_cast<size_t>(i * m + j)] = evecs[static_cast<size_t>(i * n + first + j)];
    } else {
      detail::MatVec av = [&](const std::vector<double>& x) {
        return to_values(a.mv(Tensor::from_vector({n}, x)));
      };
      detail::lanczos_eigh(av, static_cast<int>(n), static_cast<int>(m),
                           mode == EigMode::lowest, std::max(cfg.tol, 1e-12), cfg.max_iter,
                           cfg.seed, lam_v, u_v);
      spectrum = lam_v;
    }
    fix_signs(u_v, n, m);
  }

  std::vector<Tensor> parents = a.params();
  parents.insert(parents.end(), mop.params().begin(), mop.params().end());

  SolverConfig nested_cfg = cfg;
  nested_cfg.method = "auto";

  auto backward = [a, mop, cfg = nested_cfg, spectrum, first, n, m](
                      const std::vector<Tensor>& outputs, const std::vector<Tensor>& cots,
                      const std::vector<Tensor>&) -> std::vector<Tensor> {
    const Tensor& lam = outputs[0];
    const Tensor& u = outputs[1];
    Tensor glam = cots[0].defined() ? cots[0] : Tensor::zeros({m});
    const bool want_vectors = cots[1].defined();

    double scale = 1.0;
    for (double v : spectrum) scale = std::max(scale, std::abs(v));

    if (want_vectors) {
      // Eigenvector derivatives blow up on a degenerate spectrum. Dense mode
      // carries the full spectrum; pair i sits at spectrum[first + i].
      for (std::int64_t i = 0; i < m; ++i) {
        const double li = lam.at(i);
        for (size_t j = 0; j < spectrum.size(); ++j) {
          if (static_cast<std::int64_t>(j) == first + i) continue;
          if (std::abs(spectrum[j] - li) < 1e-8 * scale)
            throw SolverError(
                "symeig: eigenvalue " + std::to_string(li) +
                    " is (numerically) repeated; eigenvector derivative is undefined",
                std::abs(spectrum[j] - li));
        }
      }
    }

    const bool general = !mop.is_identity();
    std::vector<Tensor> ca_cols, cm_cols;
    for (std::int64_t i = 0; i < m; ++i) {
      Tensor li = index(lam, i);
      Tensor ui = flatten(slice(u, 1, i, i + 1));
      Tensor gli = index(glam, i);

      Tensor ca = mul(ui, gli);
      Tensor cm;
      if (!mop.params().empty()) cm = mul(ui, neg(mul(gli, li)));

      if (want_vectors) {
        Tensor gui = flatten(slice(cots[1], 1, i, i + 1));
        bool solve_needed = grad_mode_enabled();
        if (!solve_needed)
          for (double v : gui.data())
            if (v != 0.0) solve_needed = true;
        if (solve_needed) {
          Tensor mui = general ? mop.mv(ui) : ui;
          Tensor si = dot(ui, gui);
          Tensor hi = sub(gui, mul(mui, si));

          // Deflated system: (A - l M + sigma (Mu)(Mu)^T) v = -h has the
          // M-orthogonal solution of (A - l M) v = -h as its unique solution.
          const double sigma = std::max(1.0, std::abs(lam.at(i)));
          std::vector<Tensor> dparams{li, ui};
          dparams.insert(dparams.end(), a.params().begin(), a.params().end());
          dparams.insert(dparams.end(), mop.params().begin(), mop.params().end());
          const size_t na_local = a.params().size();
          auto amv = [aop = a, mo = mop, sigma, na_local, general](
                         std::span<const Tensor> in) -> Tensor {
            const Tensor& x = in[0];
            const Tensor& l = in[1];
            const Tensor& uu = in[2];
            std::vector<Tensor> ap(in.begin() + 3, in.begin() + 3 + static_cast<std::ptrdiff_t>(na_local));
            std::vector<Tensor> mp(in.begin() + 3 + static_cast<std::ptrdiff_t>(na_local), in.end());
            LinearOperator al = aop.with_params(ap);
            LinearOperator ml = mo.with_params(mp);
            Tensor mx = general ? ml.mv(x) : x;
            Tensor mu = general ? ml.mv(uu) : uu;
            Tensor y = sub(al.mv(x), mul(mx, l));
            return add(y, mul(mu, mul(dot(mu, x), sigma)));
          };
          LinearOperator defl(n, n, amv, dparams, amv, {.symmetric = true});
          Tensor vi = solve(defl, neg(hi), {}, {}, cfg);

          ca = add(ca, vi);
          if (cm.defined()) cm = sub(cm, add(mul(vi, li), mul(ui, mul(si, 0.5))));
        }
      }
      ca_cols.push_back(reshape(ca, {n, 1}));
      if (cm.defined()) cm_cols.push_back(reshape(cm, {n, 1}));
    }

    std::vector<Tensor> grads;
    if (!a.params().empty()) {
      Tensor ca_mat = ca_cols.size() == 1 ? ca_cols[0] : concat(ca_cols, 1);
      auto da = params_vjp(a, u, ca_mat);
      grads.insert(grads.end(), da.begin(), da.end());
    }
    if (!mop.params().empty()) {
      Tensor cm_mat = cm_cols.size() == 1 ? cm_cols[0] : concat(cm_cols, 1);
      auto dm = params_vjp(mop, u, cm_mat);
      grads.insert(grads.end(), dm.begin(), dm.end());
    }
    return grads;
  };

  auto outs = make_multi_op("symeig", std::move(parents), {{m}, {n, m}},
                            {std::make_shared<const std::vector<double>>(std::move(lam_v)),
                             std::make_shared<const std::vector<double>>(std::move(u_v))},
                            std::move(backward));
  return {outs[0], outs[1]};
}

}  // namespace diffnum::linop
