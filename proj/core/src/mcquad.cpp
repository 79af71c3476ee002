#include "diffnum/integrate/mcquad.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diffnum/errors.hpp"
#include "diffnum/ops.hpp"
#include "diffnum/rng.hpp"

namespace diffnum::integrate {

namespace {

// One tiny tape per sample keeps gradient accumulation O(1) in chain length;
// the estimator is a mean, so per-sample grads just sum.
void axpy(std::vector<double>& acc, double c, std::span<const double> g) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += c * g[i];
}

}  // namespace

Tensor mcquad(const TensorFn& f, const TensorFn& logp, const Tensor& x0,
              std::span<const Tensor> params_f, std::span<const Tensor> params_p,
              const McOptions& opts) {
  if (!f || !logp) throw std::invalid_argument("mcquad: f and logp must be callable");
  if (!x0.defined()) throw std::invalid_argument("mcquad: x0 is undefined");
  if (opts.n_samples < 1) throw std::invalid_argument("mcquad: n_samples must be positive");
  if (opts.n_burnin < 0) throw std::invalid_argument("mcquad: n_burnin must be non-negative");
  if (!(opts.proposal_scale > 0.0))
    throw std::invalid_argument("mcquad: proposal_scale must be positive");

  std::vector<Tensor> pf(params_f.begin(), params_f.end());
  std::vector<Tensor> pp(params_p.begin(), params_p.end());
  for (const auto& p : pf)
    if (!p.defined()) throw std::invalid_argument("mcquad: undefined tensor in params_f");
  for (const auto& p : pp)
    if (!p.defined()) throw std::invalid_argument("mcquad: undefined tensor in params_p");
  std::vector<Tensor> pfv(pf.size()), ppv(pp.size());
  for (size_t i = 0; i < pf.size(); ++i) pfv[i] = pf[i].detach();
  for (size_t i = 0; i < pp.size(); ++i) ppv[i] = pp[i].detach();

  const Shape xshape = x0.shape();

  auto eval_logp = [&](const std::vector<double>& xv) -> double {
    NoGradGuard ng;
    std::vector<Tensor> args;
    args.reserve(1 + ppv.size());
    args.push_back(Tensor::from_vector(xshape, xv));
    for (const auto& p : ppv) args.push_back(p);
    Tensor out = logp(args);
    if (!out.defined() || !out.is_scalar())
      throw ShapeError("mcquad: logp must return a scalar");
    return out.data()[0];
  };

  Rng rng(opts.seed);
  std::vector<double> x(x0.data().begin(), x0.data().end());
  double lp = eval_logp(x);
  if (!std::isfinite(lp))
    throw SolverError("mcquad: log-density is not finite at x0", lp);

  // Random-walk Metropolis-Hastings; the symmetric proposal drops out of the
  // acceptance ratio, and so does p's normalization.
  std::vector<double> prop(x.size());
  auto mh_step = [&]() -> bool {
    for (size_t i = 0; i < x.size(); ++i) prop[i] = x[i] + opts.proposal_scale * rng.normal();
    const double lpp = eval_logp(prop);
    if (!std::isfinite(lpp))
      throw SolverError("mcquad: log-density is not finite at a proposal", lpp);
    if (lpp - lp > std::log(rng.uniform())) {
      x.swap(prop);
      lp = lpp;
      return true;
    }
    return false;
  };

  int accepted = 0;
  for (int i = 0; i < opts.n_burnin; ++i) accepted += mh_step() ? 1 : 0;
  if (opts.n_burnin > 0 && accepted == 0)
    throw SolverError("mcquad: the chain accepted no proposals during burn-in", 0.0);

  // Sampling pass: cache the draws (the VJP reuses them) and average f.
  std::vector<std::vector<double>> samples;
  samples.reserve(static_cast<size_t>(opts.n_samples));
  std::vector<std::vector<double>> fvals;
  fvals.reserve(static_cast<size_t>(opts.n_samples));
  Shape fshape;
  bool have_shape = false;
  std::vector<double> acc_mean;
  for (int s = 0; s < opts.n_samples; ++s) {
    mh_step();
    samples.push_back(x);
    NoGradGuard ng;
    std::vector<Tensor> args;
    args.reserve(1 + pfv.size());
    args.push_back(Tensor::from_vector(xshape, x));
    for (const auto& p : pfv) args.push_back(p);
    Tensor out = f(args);
    if (!out.defined()) throw ShapeError("mcquad: f returned an undefined tensor");
    if (!have_shape) {
      fshape = out.shape();
      have_shape = true;
      acc_mean.assign(out.data().size(), 0.0);
    } else if (out.shape() != fshape) {
      throw ShapeError("mcquad: f output shape changed across samples, " + shape_str(fshape) +
                       " vs " + shape_str(out.shape()));
    }
    const auto od = out.data();
    for (size_t i = 0; i < acc_mean.size(); ++i) acc_mean[i] += od[i];
    fvals.push_back(std::vector<double>(od.begin(), od.end()));
  }
  const double inv_n = 1.0 / static_cast<double>(opts.n_samples);
  for (auto& m : acc_mean) m *= inv_n;
  auto ybuf = std::make_shared<const std::vector<double>>(acc_mean);

  const size_t nf = pf.size(), np = pp.size();
  std::vector<Tensor> parents;
  parents.reserve(nf + np);
  for (auto& p : pf) parents.push_back(std::move(p));
  for (auto& p : pp) parents.push_back(std::move(p));

  auto backward = [f, logp, xshape, nf, np, inv_n, samples = std::move(samples),
                   fvals = std::move(fvals), yv = std::move(acc_mean)](
                      const std::vector<Tensor>&, const std::vector<Tensor>& cots,
                      const std::vector<Tensor>& par) -> std::vector<Tensor> {
    const Tensor gy = cots[0].detach();  // chain frozen: first-order estimator
    const auto gyd = gy.data();
    std::vector<std::vector<double>> acc(par.size());
    for (size_t i = 0; i < par.size(); ++i)
      acc[i].assign(static_cast<size_t>(par[i].numel()), 0.0);

    GradModeGuard tape(true);
    for (size_t s = 0; s < samples.size(); ++s) {
      Tensor xs = Tensor::from_vector(xshape, samples[s]);
      if (nf > 0) {
        // dL/dtheta_f term: plain pathwise derivative of f at the frozen draw.
        std::vector<Tensor> tf(nf);
        for (size_t i = 0; i < nf; ++i) tf[i] = par[i].detach().leaf();
        std::vector<Tensor> args;
        args.reserve(1 + nf);
        args.push_back(xs);
        for (const auto& t : tf) args.push_back(t);
        Tensor ip = sum(mul(f(args), gy));
        auto gs = grad(ip, tf);
        for (size_t i = 0; i < nf; ++i) axpy(acc[i], inv_n, gs[i].data());
      }
      if (np > 0) {
        // Score-function term, centered on the forward mean so constants of
        // integration (and a constant f) contribute exactly nothing.
        double c = 0.0;
        for (size_t k = 0; k < gyd.size(); ++k) c += (fvals[s][k] - yv[k]) * gyd[k];
        if (c != 0.0) {
          std::vector<Tensor> tp(np);
          for (size_t j = 0; j < np; ++j) tp[j] = par[nf + j].detach().leaf();
          std::vector<Tensor> args;
          args.reserve(1 + np);
          args.push_back(xs);
          for (const auto& t : tp) args.push_back(t);
          auto gs = grad(logp(args), tp);
          for (size_t j = 0; j < np; ++j) axpy(acc[nf + j], inv_n * c, gs[j].data());
        }
      }
    }
    std::vector<Tensor> results(par.size());
    for (size_t i = 0; i < par.size(); ++i)
      results[i] = Tensor::from_vector(par[i].shape(), std::move(acc[i]));
    return results;
  };

  return make_op("mcquad", std::move(parents), fshape, std::move(ybuf), std::move(backward));
}

}  // namespace diffnum::integrate
