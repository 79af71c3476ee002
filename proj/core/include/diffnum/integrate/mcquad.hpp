#pragma once

#include <cstdint>
#include <span>

#include "diffnum/autograd.hpp"
#include "diffnum/tensor.hpp"

namespace diffnum::integrate {

/// Sampler and estimator knobs for mcquad.
struct McOptions {
  int n_samples = 1000;       // post-burn-in draws used by both estimators
  int n_burnin = 1000;        // discarded chain steps before sampling starts
  double proposal_scale = 1.0;  // std-dev of the Gaussian random-walk proposal
  std::uint64_t seed = 0;
};

/// Monte Carlo expectation y = E_p[f(x, theta_f)] where p is known only
/// through an unnormalized log-density logp(x, theta_p). Draws come from a
/// random-walk Metropolis-Hastings chain started at x0; normalization of p
/// cancels in the acceptance ratio and in the score-function gradient, so
/// logp never needs a partition constant.
///
/// f is called as f({x, params_f...}) and logp as logp({x, params_p...});
/// logp must return a scalar. The result has f's output shape.
///
/// VJP (first order only — the chain is frozen, so second derivatives of the
/// estimator are not defined here):
///   dL/dtheta_f = mean_s <dL/dy, df/dtheta_f (x_s)>
///   dL/dtheta_p = mean_s <dL/dy, f(x_s) - y> dlogp/dtheta_p (x_s)
/// Both means run over the exact sample set cached from the forward pass, so
/// the value and its gradient share randomness (common random numbers). A
/// constant f therefore has exactly zero theta_p gradient on any sample set.
///
/// Throws std::invalid_argument for bad options or undefined inputs,
/// ShapeError when logp is not scalar or f's output shape drifts across
/// samples, and SolverError when logp is non-finite at x0 or at any proposal,
/// or when the chain accepts nothing during burn-in.
Tensor mcquad(const TensorFn& f, const TensorFn& logp, const Tensor& x0,
              std::span<const Tensor> params_f = {}, std::span<const Tensor> params_p = {},
              const McOptions& opts = {});

}  // namespace diffnum::integrate
