#include "diffnum/detail/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diffnum/errors.hpp"

namespace diffnum::detail {

LuFactors lu_factor(std::vector<double> a, int n) {
  LuFactors f{std::move(a), std::vector<int>(static_cast<size_t>(n)), n};
  auto& lu = f.lu;
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(lu[static_cast<size_t>(k * n + k)]);
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(lu[static_cast<size_t>(i * n + k)]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > 1e-300))
      throw SolverError("LU factorization hit a zero pivot (singular system)", best);
    f.piv[static_cast<size_t>(k)] = p;
    if (p != k)
      for (int j = 0; j < n; ++j)
        std::swap(lu[static_cast<size_t>(k * n + j)], lu[static_cast<size_t>(p * n + j)]);
    const double d = lu[static_cast<size_t>(k * n + k)];
    for (int i = k + 1; i < n; ++i) {
      const double m = lu[static_cast<size_t>(i * n + k)] / d;
      lu[static_cast<size_t>(i * n + k)] = m;
      for (int j = k + 1; j < n; ++j)
        lu[static_cast<size_t>(i * n + j)] -= m * lu[static_cast<size_t>(k * n + j)];
    }
  }
  return f;
}

void lu_solve(const LuFactors& f, std::vector<double>& b, int nrhs) {
  const int n = f.n;
  const auto& lu = f.lu;
  for (int k = 0; k < n; ++k) {
    const int p = f.piv[static_cast<size_t>(k)];
    if (p != k)
      for (int j = 0; j < nrhs; ++j)
        std::swap(b[static_cast<size_t>(k * nrhs + j)], b[static_cast<size_t>(p * nrhs + j)]);
  }
  for (int i = 1; i < n; ++i)
    for (int k = 0; k < i; ++k) {
      const double m = lu[static_cast<size_t>(i * n + k)];
      if (m == 0.0) continue;
      for (int j = 0; j < nrhs; ++j)
        b[static_cast<size_t>(i * nrhs + j)] -= m * b[static_cast<size_t>(k * nrhs + j)];
    }
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k < n; ++k) {
      const double m = lu[static_cast<size_t>(i * n + k)];
      if (m == 0.0) continue;
      for (int j = 0; j < nrhs; ++j)
        b[static_cast<size_t>(i * nrhs + j)] -= m * b[static_cast<size_t>(k * nrhs + j)];
    }
    const double d = lu[static_cast<size_t>(i * n + i)];
    for (int j = 0; j < nrhs; ++j) b[static_cast<size_t>(i * nrhs + j)] /= d;
  }
}

std::vector<double> cholesky(std::vector<double> a, int n) {
  std::vector<double> L(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    double d = a[static_cast<size_t>(j * n + j)];
    for (int k = 0; k < j; ++k) d -= L[static_cast<size_t>(j * n + k)] * L[static_cast<size_t>(j * n + k)];
    if (!(d > 0.0))
      throw SolverError("Cholesky factorization failed (matrix not positive definite)", d);
    const double dj = std::sqrt(d);
    L[static_cast<size_t>(j * n + j)] = dj;
    for (int i = j + 1; i < n; ++i) {
      double s = a[static_cast<size_t>(i * n + j)];
      for (int k = 0; k < j; ++k) s -= L[static_cast<size_t>(i * n + k)] * L[static_cast<size_t>(j * n + k)];
      L[static_cast<size_t>(i * n + j)] = s / dj;
    }
  }
  return L;
}

void chol_solve(const std::vector<double>& L, int n, std::vector<double>& b, int nrhs) {
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) {
      const double m = L[static_cast<size_t>(i * n + k)];
      for (int j = 0; j < nrhs; ++j)
        b[static_cast<size_t>(i * nrhs + j)] -= m * b[static_cast<size_t>(k * nrhs + j)];
    }
    const double d = L[static_cast<size_t>(i * n + i)];
    for (int j = 0; j < nrhs; ++j) b[static_cast<size_t>(i * nrhs + j)] /= d;
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k < n; ++k) {
      const double m = L[static_cast<size_t>(k * n + i)];  // L^T
      for (int j = 0; j < nrhs; ++j)
        b[static_cast<size_t>(i * nrhs + j)] -= m * b[static_cast<size_t>(k * nrhs + j)];
    }
    const double d = L[static_cast<size_t>(i * n + i)];
    for (int j = 0; j < nrhs; ++j) b[static_cast<size_t>(i * nrhs + j)] /= d;
  }
}

void jacobi_eigh(std::vector<double> a, int n, std::vector<double>& vals,
                 std::vector<double>& vecs) {
  const auto nn = static_cast<size_t>(n);
  vecs.assign(nn * nn, 0.0);
  for (int i = 0; i < n; ++i) vecs[static_cast<size_t>(i * n + i)] = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += a[static_cast<size_t>(i * n + j)] * a[static_cast<size_t>(i * n + j)];
    return std::sqrt(2.0 * s);
  };
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-14 * scale * n; ++sweep) {
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[static_cast<size_t>(p * n + q)];
        if (std::abs(apq) <= 1e-300) continue;
        const double app = a[static_cast<size_t>(p * n + p)];
        const double aqq = a[static_cast<size_t>(q * n + q)];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[static_cast<size_t>(k * n + p)];
          const double akq = a[static_cast<size_t>(k * n + q)];
          a[static_cast<size_t>(k * n + p)] = c * akp - s * akq;
          a[static_cast<size_t>(k * n + q)] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[static_cast<size_t>(p * n + k)];
          const double aqk = a[static_cast<size_t>(q * n + k)];
          a[static_cast<size_t>(p * n + k)] = c * apk - s * aqk;
          a[static_cast<size_t>(q * n + k)] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vecs[static_cast<size_t>(k * n + p)];
          const double vkq = vecs[static_cast<size_t>(k * n + q)];
          vecs[static_cast<size_t>(k * n + p)] = c * vkp - s * vkq;
          vecs[static_cast<size_t>(k * n + q)] = s * vkp + c * vkq;
        }
      }
  }

  vals.resize(nn);
  std::vector<int> order(nn);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(nn);
  for (int i = 0; i < n; ++i) diag[static_cast<size_t>(i)] = a[static_cast<size_t>(i * n + i)];
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return diag[static_cast<size_t>(x)] < diag[static_cast<size_t>(y)]; });
  std::vector<double> sorted_vecs(nn * nn);
  for (size_t j = 0; j < nn; ++j) {
    vals[j] = diag[static_cast<size_t>(order[j])];
    for (int i = 0; i < n; ++i)
      sorted_vecs[static_cast<size_t>(i) * nn + j] =
          vecs[static_cast<size_t>(i * n + order[j])];
  }
  vecs = std::move(sorted_vecs);
}

}  // namespace diffnum::detail
