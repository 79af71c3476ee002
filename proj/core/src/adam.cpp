#include "diffnum/optimize/adam.hpp"

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "diffnum/errors.hpp"

namespace diffnum::optimize {

Tensor adam_step(const Tensor& param, const Tensor& g, AdamState& state, double lr,
                 double beta1, double beta2, double eps) {
  if (!param.defined() || !g.defined())
    throw std::invalid_argument("adam_step: parameter and gradient must be defined");
  if (g.shape() != param.shape())
    throw ShapeError("adam_step: gradient shape " + shape_str(g.shape()) +
                     " does not match parameter shape " + shape_str(param.shape()));
  if (!state.m.defined()) state.m = Tensor::zeros(param.shape());
  if (!state.v.defined()) state.v = Tensor::zeros(param.shape());
  if (state.m.shape() != param.shape() || state.v.shape() != param.shape())
    throw ShapeError("adam_step: state shape does not match parameter shape " +
                     shape_str(param.shape()));

  const auto gs = g.data();
  for (double x : gs)
    if (!std::isfinite(x)) throw SolverError("adam_step: non-finite gradient", x);

  const std::size_t n = static_cast<std::size_t>(param.numel());
  std::vector<double> m(state.m.data().begin(), state.m.data().end());
  std::vector<double> v(state.v.data().begin(), state.v.data().end());
  std::vector<double> p(param.data().begin(), param.data().end());

  state.step += 1;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * gs[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * gs[i] * gs[i];
    p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
  state.m = Tensor::from_vector(param.shape(), std::move(m));
  state.v = Tensor::from_vector(param.shape(), std::move(v));
  return Tensor::from_vector(param.shape(), std::move(p));
}

}  // namespace diffnum::optimize
