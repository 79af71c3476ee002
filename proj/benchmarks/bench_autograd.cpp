// Tape building and reverse passes over elementwise chains and matmuls —
// the costs every functional above them inherits.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "diffnum/autograd.hpp"
#include "diffnum/ops.hpp"
#include "diffnum/rng.hpp"

using namespace diffnum;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
  std::int64_t n = 1;
  for (auto e : shape) n *= e;
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::from_vector(std::move(shape), std::move(v));
}

void bm_elementwise_chain_forward(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(0);
  Tensor x = random_tensor({n}, rng);
  for (auto _ : state) {
    NoGradGuard ng;
    Tensor y = x;
    for (int i = 0; i < 32; ++i) y = add(mul(sin(y), 0.5), mul(y, 0.9));
    benchmark::DoNotOptimize(y.data().data());
  }
  state.SetItemsProcessed(state.iterations() * n * 32);
}
BENCHMARK(bm_elementwise_chain_forward)->Arg(64)->Arg(1024)->Arg(16384);

void bm_elementwise_chain_grad(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(0);
  Tensor x0 = random_tensor({n}, rng);
  for (auto _ : state) {
    GradModeGuard gm(true);
    Tensor x = x0.leaf();
    Tensor y = x;
    for (int i = 0; i < 32; ++i) y = add(mul(sin(y), 0.5), mul(y, 0.9));
    Tensor g = grad1(sum(y), x);
    benchmark::DoNotOptimize(g.data().data());
  }
  state.SetItemsProcessed(state.iterations() * n * 32);
}
BENCHMARK(bm_elementwise_chain_grad)->Arg(64)->Arg(1024)->Arg(16384);

void bm_matmul_grad(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(1);
  Tensor a0 = random_tensor({n, n}, rng);
  Tensor b0 = random_tensor({n, n}, rng);
  for (auto _ : state) {
    GradModeGuard gm(true);
    Tensor a = a0.leaf();
    Tensor c = sum(matmul(a, b0));
    Tensor g = grad1(c, a);
    benchmark::DoNotOptimize(g.data().data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(bm_matmul_grad)->Arg(16)->Arg(64)->Arg(128);

void bm_second_order(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  Rng rng(2);
  Tensor x0 = random_tensor({n}, rng);
  for (auto _ : state) {
    GradModeGuard gm(true);
    Tensor x = x0.leaf();
    Tensor y = sum(mul(sin(x), x));
    Tensor g = grad1(y, x, {.create_graph = true});
    Tensor h = grad1(sum(g), x);
    benchmark::DoNotOptimize(h.data().data());
  }
}
BENCHMARK(bm_second_order)->Arg(64)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
