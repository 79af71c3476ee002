#include "diffnum/detail/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diffnum/detail/dense.hpp"
#include "diffnum/errors.hpp"
#include "diffnum/rng.hpp"

namespace diffnum::detail {

namespace {

double nrm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

std::vector<double> cg(const MatVec& av, const std::vector<double>& b, double tol, int max_iter) {
  const double bnorm = nrm2(b);
  std::vector<double> x(b.size(), 0.0);
  if (bnorm == 0.0) return x;
  std::vector<double> r = b, p = b;
  double rs = dotv(r, r);
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rs) <= tol * bnorm) return x;
    std::vector<double> ap = av(p);
    const double pap = dotv(p, ap);
    if (!(pap > 0.0))
      throw SolverError("conjugate gradient: operator is not positive definite", std::sqrt(rs));
    const double alpha = rs / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    const double rs_new = dotv(r, r);
    const double beta = rs_new / rs;
    rs = rs_new;
    for (size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
  if (std::sqrt(rs) <= tol * bnorm) return x;
  throw SolverError("conjugate gradient did not converge", std::sqrt(rs) / bnorm);
}

std::vector<double> gmres(const MatVec& av, const std::vector<double>& b, double tol,
                          int max_iter) {
  const auto n = b.size();
  const double bnorm = nrm2(b);
  if (bnorm == 0.0) return std::vector<double>(n, 0.0);
  const int kmax = std::min<int>(max_iter, static_cast<int>(n));

  std::vector<std::vector<double>> V;
  V.push_back(b);
  for (auto& v : V[0]) v /= bnorm;
  // Hessenberg stored column-wise: H[j] has j+2 entries before rotations.
  std::vector<std::vector<double>> H;
  std::vector<double> cs, sn;
  std::vector<double> g{bnorm};

  int k = 0;
  double res = bnorm;
  for (; k < kmax; ++k) {
    std::vector<double> w = av(V[static_cast<size_t>(k)]);
    std::vector<double> h(static_cast<size_t>(k) + 2, 0.0);
    for (int i = 0; i <= k; ++i) {
      h[static_cast<size_t>(i)] = dotv(w, V[static_cast<size_t>(i)]);
      axpy(-h[static_cast<size_t>(i)], V[static_cast<size_t>(i)], w);
    }
    h[static_cast<size_t>(k) + 1] = nrm2(w);

    // Apply existing Givens rotations, then create the new one.
    for (int i = 0; i < k; ++i) {
      const double t = cs[static_cast<size_t>(i)] * h[static_cast<size_t>(i)] +
                       sn[static_cast<size_t>(i)] * h[static_cast<size_t>(i) + 1];
      h[static_cast<size_t>(i) + 1] = -sn[static_cast<size_t>(i)] * h[static_cast<size_t>(i)] +
                                      cs[static_cast<size_t>(i)] * h[static_cast<size_t>(i) + 1];
      h[static_cast<size_t>(i)] = t;
    }
    const double denom = std::hypot(h[static_cast<size_t>(k)], h[static_cast<size_t>(k) + 1]);
    if (denom == 0.0) throw SolverError("GMRES breakdown (zero Hessenberg column)", res / bnorm);
    cs.push_back(h[static_cast<size_t>(k)] / denom);
    sn.push_back(h[static_cast<size_t>(k) + 1] / denom);
    h[static_cast<size_t>(k)] = denom;
    g.push_back(-sn.back() * g[static_cast<size_t>(k)]);
    g[static_cast<size_t>(k)] *= cs.back();
    H.push_back(std::move(h));

    res = std::abs(g.back());
    if (res <= tol * bnorm) {
      ++k;
      break;
    }
    if (H.back()[static_cast<size_t>(k) + 1] == 0.0) {
      ++k;
      break;  // invariant subspace: current solution is exact
    }
    for (auto& v : w) v /= H.back()[static_cast<size_t>(k) + 1];
    V.push_back(std::move(w));
  }
  if (res > tol * bnorm) throw SolverError("GMRES did not converge", res / bnorm);

  // Back-substitute the k x k triangular system.
  std::vector<double> y(static_cast<size_t>(k), 0.0);
  for (int i = k - 1; i >= 0; --i) {
    double s = g[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) s -= H[static_cast<size_t>(j)][static_cast<size_t>(i)] * y[static_cast<size_t>(j)];
    y[static_cast<size_t>(i)] = s / H[static_cast<size_t>(i)][static_cast<size_t>(i)];
  }
  std::vector<double> x(n, 0.0);
  for (int j = 0; j < k; ++j) axpy(y[static_cast<size_t>(j)], V[static_cast<size_t>(j)], x);
  return x;
}

void lanczos_eigh(const MatVec& av, int n, int m, bool lowest, double tol, int max_basis,
                  std::uint64_t seed, std::vector<double>& vals, std::vector<double>& vecs) {
  const int block = std::min(m, n);
  const int cap = std::min(n, std::max(max_basis, 4 * m + 8));
  Rng rng(seed ^ 0x1234abcdu);

  std::vector<std::vector<double>> Q;        // orthonormal basis columns
  std::vector<std::vector<double>> AQ;       // A applied to each basis column
  std::vector<double> T;                     // projected matrix, resized as Q grows

  auto orthonormalize = [&](std::vector<double> w) -> std::vector<double> {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : Q) axpy(-dotv(w, q), q, w);
    const double nw = nrm2(w);
    if (nw < 1e-10) return {};
    for (auto& v : w) v /= nw;
    return w;
  };
  auto push_random_direction = [&] {
    for (int attempt = 0; attempt < 20; ++attempt) {
      std::vector<double> w(static_cast<size_t>(n));
      for (auto& v : w) v = rng.normal();
      auto q = orthonormalize(std::move(w));
      if (!q.empty()) {
        Q.push_back(std::move(q));
        return;
      }
    }
    throw SolverError("Lanczos could not expand the basis", 0.0);
  };

  for (int i = 0; i < block; ++i) push_random_direction();

  int processed = 0;  // basis columns whose A-product is already in AQ/T
  while (true) {
    const int k0 = processed, k1 = static_cast<int>(Q.size());
    for (int j = k0; j < k1; ++j) AQ.push_back(av(Q[static_cast<size_t>(j)]));
    const int k = k1;
    // (Re)build the projection T = Q^T A Q, symmetrized.
    T.assign(static_cast<size_t>(k) * static_cast<size_t>(k), 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) {
        const double tij = 0.5 * (dotv(Q[static_cast<size_t>(i)], AQ[static_cast<size_t>(j)]) +
                                  dotv(Q[static_cast<size_t>(j)], AQ[static_cast<size_t>(i)]));
        T[static_cast<size_t>(i * k + j)] = tij;
        T[static_cast<size_t>(j * k + i)] = tij;
      }
    processed = k;

    std::vector<double> tv, tw;
    jacobi_eigh(T, k, tv, tw);

    if (k >= m) {
      // Ritz pairs for the wanted end of the spectrum (ascending order kept).
      std::vector<int> sel(static_cast<size_t>(m));
      for (int i = 0; i < m; ++i) sel[static_cast<size_t>(i)] = lowest ? i : k - m + i;

      std::vector<std::vector<double>> ritz(static_cast<size_t>(m));
      std::vector<std::vector<double>> rres(static_cast<size_t>(m));
      double scale = 0.0;
      for (double t : tv) scale = std::max(scale, std::abs(t));
      if (scale == 0.0) scale = 1.0;
      bool ok = true;
      for (int i = 0; i < m && ok; ++i) {
        const int c = sel[static_cast<size_t>(i)];
        std::vector<double> y(static_cast<size_t>(n), 0.0), ay(static_cast<size_t>(n), 0.0);
        for (int j = 0; j < k; ++j) {
          const double w = tw[static_cast<size_t>(j * k + c)];
          axpy(w, Q[static_cast<size_t>(j)], y);
          axpy(w, AQ[static_cast<size_t>(j)], ay);
        }
        std::vector<double> r = ay;
        axpy(-tv[static_cast<size_t>(c)], y, r);
        if (nrm2(r) > tol * scale) ok = false;
        ritz[static_cast<size_t>(i)] = std::move(y);
        rres[static_cast<size_t>(i)] = std::move(r);
      }
      if (ok || k >= n) {
        if (!ok && k >= n)
          throw SolverError("Lanczos exhausted the space without meeting tolerance", tol);
        vals.resize(static_cast<size_t>(m));
        vecs.assign(static_cast<size_t>(n) * static_cast<size_t>(m), 0.0);
        for (int i = 0; i < m; ++i) {
          vals[static_cast<size_t>(i)] = tv[static_cast<size_t>(sel[static_cast<size_t>(i)])];
          for (int r = 0; r < n; ++r)
            vecs[static_cast<size_t>(r * m + i)] = ritz[static_cast<size_t>(i)][static_cast<size_t>(r)];
        }
        return;
      }
      // Expand along the residual directions (restarted block growth). The
      // basis may fill the budget exactly; at k = n the subspace is the whole
      // space and the Ritz pairs are exact.
      if (k >= cap)
        throw SolverError("Lanczos did not converge within the basis budget",
                          static_cast<double>(k));
      const int want = std::min(block, cap - k);
      int added = 0;
      for (int i = 0; i < m && added < want; ++i) {
        auto q = orthonormalize(rres[static_cast<size_t>(i)]);
        if (!q.empty()) {
          Q.push_back(std::move(q));
          ++added;
        }
      }
      while (added < want && static_cast<int>(Q.size()) < n) {
        push_random_direction();
        ++added;
      }
    } else {
      if (static_cast<int>(Q.size()) + 1 > cap)
        throw SolverError("Lanczos basis budget too small for the requested pairs",
                          static_cast<double>(Q.size()));
      push_random_direction();
    }
  }
}

}  // namespace diffnum::detail
