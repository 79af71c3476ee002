#include "diffnum/gradcheck.hpp"

#include <cmath>
#include <sstream>

#include "diffnum/ops.hpp"
#include "diffnum/rng.hpp"

namespace diffnum {

std::string CheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "FAIL") << " (max_abs_err=" << max_abs_err
     << ", max_rel_err=" << max_rel_err << ", failures=" << failures.size() << ")";
  if (!failures.empty()) {
    const auto& w = failures.front();
    os << " first: input " << w.input << "[" << w.input_elem << "] / out[" << w.output_elem
       << "] analytic=" << w.analytic << " numeric=" << w.numeric;
  }
  return os.str();
}

namespace {

Tensor basis(const Shape& shape, std::int64_t j) {
  std::vector<double> v(static_cast<size_t>(numel_of(shape)), 0.0);
  v[static_cast<size_t>(j)] = 1.0;
  return Tensor::from_vector(shape, std::move(v));
}

Tensor perturbed(const Tensor& t, std::int64_t elem, double delta) {
  std::vector<double> v(t.data().begin(), t.data().end());
  v[static_cast<size_t>(elem)] += delta;
  return Tensor::from_vector(t.shape(), std::move(v));
}

void record(CheckReport& rep, const CheckOptions& opts, std::size_t k, std::int64_t i,
            std::int64_t j, double analytic, double numeric) {
  const double abs_err = std::abs(analytic - numeric);
  const bool finite = std::isfinite(analytic) && std::isfinite(numeric);
  if (finite) {
    rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
    if (numeric != 0.0) rep.max_rel_err = std::max(rep.max_rel_err, abs_err / std::abs(numeric));
  }
  if (!finite || abs_err > opts.atol + opts.rtol * std::abs(numeric)) {
    rep.passed = false;
    if (rep.failures.size() < 32) rep.failures.push_back({k, i, j, analytic, numeric});
  }
}

}  // namespace

CheckReport gradcheck(const TensorFn& f, std::span<const Tensor> inputs,
                      const CheckOptions& opts) {
  std::vector<Tensor> base(inputs.begin(), inputs.end());
  for (auto& b : base) b = b.detach();

  Tensor out0;
  {
    NoGradGuard ng;
    out0 = f(base);
  }
  const std::int64_t n_out = out0.numel();

  // Analytic Jacobian rows: one vjp per output element.
  std::vector<std::vector<std::vector<double>>> analytic(static_cast<size_t>(n_out));
  for (std::int64_t j = 0; j < n_out; ++j) {
    auto gs = vjp(f, base, basis(out0.shape(), j));
    auto& row = analytic[static_cast<size_t>(j)];
    row.reserve(gs.size());
    for (const auto& g : gs) row.emplace_back(g.data().begin(), g.data().end());
  }

  // Numeric Jacobian columns: one central difference per input element.
  CheckReport rep;
  for (std::size_t k = 0; k < base.size(); ++k) {
    for (std::int64_t i = 0; i < base[k].numel(); ++i) {
      std::vector<Tensor> xp = base, xm = base;
      xp[k] = perturbed(base[k], i, opts.eps);
      xm[k] = perturbed(base[k], i, -opts.eps);
      Tensor fp, fm;
      {
        NoGradGuard ng;
        fp = f(xp);
        fm = f(xm);
      }
      for (std::int64_t j = 0; j < n_out; ++j) {
        const double numeric = (fp.at(j) - fm.at(j)) / (2.0 * opts.eps);
        const double an = analytic[static_cast<size_t>(j)][k][static_cast<size_t>(i)];
        record(rep, opts, k, i, j, an, numeric);
      }
    }
  }
  return rep;
}

CheckReport gradgradcheck(const TensorFn& f, std::span<const Tensor> inputs,
                          const CheckOptions& opts) {
  Tensor out0;
  {
    NoGradGuard ng;
    std::vector<Tensor> base(inputs.begin(), inputs.end());
    out0 = f(base);
  }
  Rng rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<double> cv(static_cast<size_t>(out0.numel()));
  for (auto& c : cv) c = rng.uniform(0.5, 1.5);
  const Tensor v = Tensor::from_vector(out0.shape(), std::move(cv));

  TensorFn g = [&f, v](std::span<const Tensor> xs) -> Tensor {
    GradModeGuard gm(true);
    std::vector<Tensor> leaves;
    leaves.reserve(xs.size());
    for (const auto& x : xs) leaves.push_back(x.has_node() ? x : x.leaf());
    Tensor loss = sum(mul(f(leaves), v));
    auto gs = grad(loss, leaves, {.create_graph = true});
    std::vector<Tensor> flat;
    flat.reserve(gs.size());
    for (const auto& gi : gs) flat.push_back(flatten(gi));
    return flat.size() == 1 ? flat[0] : concat(flat, 0);
  };
  return gradcheck(g, inputs, opts);
}

}  // namespace diffnum
