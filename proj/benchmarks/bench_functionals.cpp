// End-to-end costs of the differentiable functionals: forward solve plus the
// implicit-function backward pass, quadrature, and ODE adjoints.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "diffnum/autograd.hpp"
#include "diffnum/integrate/quad.hpp"
#include "diffnum/integrate/solve_ivp.hpp"
#include "diffnum/interp/interp1d.hpp"
#include "diffnum/linop/solve.hpp"
#include "diffnum/linop/symeig.hpp"
#include "diffnum/ops.hpp"
#include "diffnum/optimize/rootfinder.hpp"
#include "diffnum/rng.hpp"

using namespace diffnum;

namespace {

Tensor random_spd(std::int64_t n, Rng& rng) {
  std::vector<double> v(static_cast<size_t>(n * n));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  Tensor c = Tensor::from_vector({n, n}, v);
  std::vector<double> eye(static_cast<size_t>(n * n), 0.0);
  for (std::int64_t i = 0; i < n; ++i) eye[static_cast<size_t>(i * n + i)] = 2.0 * n;
  return add(add(c, transpose(c)), Tensor::from_vector({n, n}, eye));
}

void bm_solve_grad(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(3);
  Tensor a0 = random_spd(n, rng);
  std::vector<double> bv(static_cast<size_t>(n));
  for (double& x : bv) x = rng.uniform(-1.0, 1.0);
  Tensor b0 = Tensor::from_vector({n}, bv);
  for (auto _ : state) {
    GradModeGuard gm(true);
    Tensor a = a0.leaf();
    auto op = linop::LinearOperator::from_dense(a, {.symmetric = true, .positive_definite = true});
    Tensor x = linop::solve(op, b0);
    Tensor g = grad1(sum(x), a);
    benchmark::DoNotOptimize(g.data().data());
  }
}
BENCHMARK(bm_solve_grad)->Arg(8)->Arg(32)->Arg(96);

void bm_symeig_grad(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(4);
  Tensor a0 = random_spd(n, rng);
  for (auto _ : state) {
    GradModeGuard gm(true);
    Tensor a = a0.leaf();
    auto op = linop::LinearOperator::from_dense(a, {.symmetric = true});
    auto r = linop::symeig(op, 4);
    Tensor g = grad1(sum(r.eigenvalues), a);
    benchmark::DoNotOptimize(g.data().data());
  }
}
BENCHMARK(bm_symeig_grad)->Arg(8)->Arg(32)->Arg(96);

void bm_rootfinder_grad(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(5);
  std::vector<double> tv(static_cast<size_t>(n));
  for (double& x : tv) x = rng.uniform(1.0, 3.0);
  Tensor theta0 = Tensor::from_vector({n}, tv);
  TensorFn f = [](std::span<const Tensor> v) { return sub(mul(v[0], v[0]), v[1]); };
  for (auto _ : state) {
    GradModeGuard gm(true);
    Tensor theta = theta0.leaf();
    Tensor y = optimize::rootfinder(f, Tensor::full({n}, 1.5), std::vector<Tensor>{theta},
                                    {.tol = 1e-12});
    Tensor g = grad1(sum(y), theta);
    benchmark::DoNotOptimize(g.data().data());
  }
}
BENCHMARK(bm_rootfinder_grad)->Arg(4)->Arg(32);

void bm_quad_grad(benchmark::State& state) {
  const int panels = static_cast<int>(state.range(0));
  TensorFn f = [](std::span<const Tensor> v) { return mul(exp(mul(v[1], v[0])), cos(v[0])); };
  for (auto _ : state) {
    GradModeGuard gm(true);
    Tensor theta = Tensor::scalar(0.5).leaf();
    Tensor q = integrate::quad(f, Tensor::scalar(0.0), Tensor::scalar(3.0),
                               std::vector<Tensor>{theta}, {.panels = panels});
    Tensor g = grad1(q, theta);
    benchmark::DoNotOptimize(g.data().data());
  }
}
BENCHMARK(bm_quad_grad)->Arg(4)->Arg(32)->Arg(256);

void bm_solve_ivp_grad(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(6);
  std::vector<double> yv(static_cast<size_t>(n));
  for (double& x : yv) x = rng.uniform(0.5, 1.5);
  Tensor y0v = Tensor::from_vector({n}, yv);
  // Linear mixing dynamics: cheap per step, nontrivial adjoint.
  TensorFn f = [](std::span<const Tensor> v) {
    return sub(mul(v[1], 0.1), mul(sin(v[1]), 0.3));
  };
  for (auto _ : state) {
    GradModeGuard gm(true);
    Tensor y0 = y0v.leaf();
    Tensor y1 = integrate::solve_ivp(f, y0, Tensor::scalar(0.0), Tensor::scalar(1.0), {},
                                     {.rtol = 1e-8, .atol = 1e-10});
    Tensor g = grad1(sum(y1), y0);
    benchmark::DoNotOptimize(g.data().data());
  }
}
BENCHMARK(bm_solve_ivp_grad)->Arg(4)->Arg(64);

void bm_interp1d_query(benchmark::State& state) {
  const std::int64_t nq = state.range(0);
  const std::int64_t n = 64;
  std::vector<double> xs(static_cast<size_t>(n)), ys(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    xs[static_cast<size_t>(i)] = static_cast<double>(i) / (n - 1);
    ys[static_cast<size_t>(i)] = std::sin(6.0 * xs[static_cast<size_t>(i)]);
  }
  Rng rng(7);
  std::vector<double> qs(static_cast<size_t>(nq));
  for (double& q : qs) q = rng.uniform(0.0, 1.0);
  Tensor x = Tensor::from_vector({n}, xs), y = Tensor::from_vector({n}, ys);
  Tensor q = Tensor::from_vector({nq}, qs);
  for (auto _ : state) {
    NoGradGuard ng;
    Tensor p = interp::interp1d(x, y, q, interp::InterpKind::cubic);
    benchmark::DoNotOptimize(p.data().data());
  }
  state.SetItemsProcessed(state.iterations() * nq);
}
BENCHMARK(bm_interp1d_query)->Arg(16)->Arg(1024);

}  // namespace
