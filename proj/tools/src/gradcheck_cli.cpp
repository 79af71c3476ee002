// Derivative validation harness: runs finite-difference checks (first order,
// and curvature checks through double backward) against every differentiable
// functional in the library, then writes a machine-readable report. The
// `tampered` suite wires a deliberately wrong backward pass; selecting it must
// end in a nonzero exit — a negative control that guards the harness itself
// against vacuous passes. It is excluded from `all` for that reason.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diffnum/autograd.hpp"
#include "diffnum/gradcheck.hpp"
#include "diffnum/integrate/quad.hpp"
#include "diffnum/integrate/solve_ivp.hpp"
#include "diffnum/integrate/squad.hpp"
#include "diffnum/interp/interp1d.hpp"
#include "diffnum/linop/solve.hpp"
#include "diffnum/linop/symeig.hpp"
#include "diffnum/ops.hpp"
#include "diffnum/optimize/minimize.hpp"
#include "diffnum/optimize/rootfinder.hpp"
#include "json.hpp"

using namespace diffnum;

namespace {

struct Check {
  std::string suite;
  std::string name;
  int order;  // 1 = gradient vs finite differences, 2 = double backward
  std::function<CheckReport(const CheckOptions&)> run;
};

Tensor fv(std::initializer_list<double> v) {
  return Tensor::from_vector({static_cast<std::int64_t>(v.size())}, std::vector<double>(v));
}

// --- solve -----------------------------------------------------------------

// x = (reshape(theta, 2x2) + 4 I)^-1 b; well conditioned by construction.
Tensor solve_theta(std::span<const Tensor> in) {
  Tensor eye = Tensor::from_vector({2, 2}, {4.0, 0.0, 0.0, 4.0});
  Tensor a = add(reshape(in[0], {2, 2}), eye);
  return linop::solve(linop::LinearOperator::from_dense(a), in[1]);
}

// Scalar-parametrized SPD family for curvature: A(t) = A0 + t E00.
Tensor solve_scalar(std::span<const Tensor> in) {
  Tensor base = Tensor::from_vector({2, 2}, {5.0, 1.0, 1.0, 3.0});
  Tensor bump = Tensor::from_vector({2, 2}, {1.0, 0.0, 0.0, 0.0});
  Tensor a = add(base, mul(bump, in[0]));
  Tensor b = fv({1.0, -2.0});
  return linop::solve(linop::LinearOperator::from_dense(a, {.symmetric = true}), b);
}

// --- symeig ----------------------------------------------------------------

Tensor symeig_theta(std::span<const Tensor> in) {
  Tensor c = reshape(in[0], {3, 3});
  Tensor s = add(c, transpose(c));
  auto res = linop::symeig(linop::LinearOperator::from_dense(s, {.symmetric = true}), 3);
  return res.eigenvalues;
}

Tensor symeig_theta4(std::span<const Tensor> in) {
  Tensor c = reshape(in[0], {4, 4});
  Tensor s = add(c, transpose(c));
  auto res = linop::symeig(linop::LinearOperator::from_dense(s, {.symmetric = true}), 4);
  return res.eigenvalues;
}

// --- implicit functions ----------------------------------------------------

Tensor root_sqrt(std::span<const Tensor> in) {
  // y solves y^2 - a = 0, i.e. y = sqrt(a).
  TensorFn f = [](std::span<const Tensor> v) { return sub(mul(v[0], v[0]), v[1]); };
  return optimize::rootfinder(f, fv({1.3}), std::vector<Tensor>{in[0]}, {.tol = 1e-12});
}

Tensor root_coupled(std::span<const Tensor> in) {
  // Two equations mixing both unknowns and both parameters.
  TensorFn f = [](std::span<const Tensor> v) {
    Tensor y = v[0], th = v[1];
    Tensor r0 = sub(add(mul(y, y), index(y, 1)), index(th, 0));
    Tensor r1 = sub(index(y, 1), mul(cos(index(y, 0)), index(th, 1)));
    return concat({reshape(index(r0, 0), {1}), reshape(r1, {1})}, 0);
  };
  return optimize::rootfinder(f, fv({0.8, 0.3}), std::vector<Tensor>{in[0]}, {.tol = 1e-12});
}

Tensor equil_cos(std::span<const Tensor> in) {
  // Fixed point y = cos(theta * y).
  TensorFn g = [](std::span<const Tensor> v) { return cos(mul(v[1], v[0])); };
  return optimize::equilibrium(g, fv({0.5}), std::vector<Tensor>{in[0]}, {.tol = 1e-13});
}

Tensor min_cosh(std::span<const Tensor> in) {
  // argmin_y cosh(y - theta) + 0.3 y^2: smooth, strongly convex.
  TensorFn f = [](std::span<const Tensor> v) {
    Tensor d = sub(v[0], v[1]);
    Tensor ch = mul(add(exp(d), exp(neg(d))), 0.5);
    return add(sum(ch), mul(sum(mul(v[0], v[0])), 0.3));
  };
  return optimize::minimize(f, fv({0.2}), std::vector<Tensor>{in[0]},
                            {.method = "newton", .tol = 1e-12});
}

Tensor min_quad(std::span<const Tensor> in) {
  // argmin_y (y - theta)^2 = theta; curvature of the map is exactly zero.
  TensorFn f = [](std::span<const Tensor> v) {
    Tensor d = sub(v[0], v[1]);
    return sum(mul(d, d));
  };
  return optimize::minimize(f, fv({0.0}), std::vector<Tensor>{in[0]},
                            {.method = "newton", .tol = 1e-12});
}

// --- quadrature ------------------------------------------------------------

Tensor quad_exp(std::span<const Tensor> in) {
  // int exp(theta t) cos t dt over [t0, t1]; fixed panels keep the
  // discretization identical under finite-difference perturbations.
  TensorFn f = [](std::span<const Tensor> v) {
    return mul(exp(mul(v[1], v[0])), cos(v[0]));
  };
  return integrate::quad(f, in[1], in[2], std::vector<Tensor>{in[0]}, {.panels = 16});
}

Tensor quad_poly(std::span<const Tensor> in) {
  TensorFn f = [](std::span<const Tensor> v) {
    Tensor tt = mul(v[1], v[0]);
    return mul(tt, tt);
  };
  return integrate::quad(f, Tensor::scalar(0.0), Tensor::scalar(1.0),
                         std::vector<Tensor>{in[0]}, {.panels = 8});
}

// --- sampled quadrature and interpolation ----------------------------------

Tensor squad_trap(std::span<const Tensor> in) {
  return integrate::squad(in[0], in[1]);
}

Tensor squad_simpson(std::span<const Tensor> in) {
  Tensor x = fv({0.0, 0.25, 0.5, 0.75, 1.0});
  return integrate::squad(x, in[0]);
}

Tensor interp_lin(std::span<const Tensor> in) {
  return interp::interp1d(in[0], in[1], in[2], interp::InterpKind::linear);
}

Tensor interp_cub(std::span<const Tensor> in) {
  return interp::interp1d(in[0], in[1], in[2], interp::InterpKind::cubic);
}

// --- initial value problems ------------------------------------------------

const SolverConfig kTightIvp{.rtol = 1e-10, .atol = 1e-12, .max_steps = 200000};

Tensor ivp_decay(std::span<const Tensor> in) {
  TensorFn f = [](std::span<const Tensor> v) { return neg(v[1]); };
  return integrate::solve_ivp(f, in[0], in[1], in[2], {}, kTightIvp);
}

Tensor ivp_two_body(std::span<const Tensor> in) {
  // Two softened attracting particles; gradient wrt initial state and the
  // softening constant flows through the adjoint pass.
  TensorFn f = [](std::span<const Tensor> v) {
    Tensor y = v[1], a = v[2];
    Tensor p = slice(y, 0, 0, 4), vel = slice(y, 0, 4, 8);
    Tensor r = sub(slice(p, 0, 0, 2), slice(p, 0, 2, 4));
    Tensor r2 = sum(mul(r, r));
    Tensor f1 = neg(mul(r, div(1.0, mul(sqrt(add(r2, a)), sqrt(r2)))));
    return concat({vel, f1, neg(f1)}, 0);
  };
  Tensor t0 = Tensor::scalar(0.0), t1 = Tensor::scalar(0.6);
  return integrate::solve_ivp(f, in[0], t0, t1, std::vector<Tensor>{in[1]}, kTightIvp);
}

// --- negative control ------------------------------------------------------

Tensor tampered_square(std::span<const Tensor> in) {
  // Forward x^2, backward claims -2x * cot: the check must catch this.
  const Tensor& x = in[0];
  std::vector<double> buf(x.data().begin(), x.data().end());
  for (double& v : buf) v *= v;
  return make_op(
      "tampered_square", {x}, x.shape(),
      std::make_shared<const std::vector<double>>(std::move(buf)),
      [](const std::vector<Tensor>&, const std::vector<Tensor>& cots,
         const std::vector<Tensor>& parents) {
        return std::vector<Tensor>{neg(mul(cots[0], mul(parents[0], 2.0)))};
      });
}

std::vector<Check> build_checks() {
  std::vector<Check> cs;
  auto add1 = [&](std::string suite, std::string name, TensorFn f, std::vector<Tensor> in) {
    cs.push_back({std::move(suite), std::move(name), 1,
                  [f = std::move(f), in = std::move(in)](const CheckOptions& o) {
                    return gradcheck(f, in, o);
                  }});
  };
  auto add2 = [&](std::string suite, std::string name, TensorFn f, std::vector<Tensor> in) {
    cs.push_back({std::move(suite), std::move(name), 2,
                  [f = std::move(f), in = std::move(in)](const CheckOptions& o) {
                    CheckOptions o2 = o;
                    o2.rtol = std::max(o.rtol, 1e-4);  // curvature baseline
                    return gradgradcheck(f, in, o2);
                  }});
  };

  add1("solve", "solve/dense_2x2", solve_theta,
       {fv({0.9, -0.3, 0.2, 1.1}), fv({1.0, -2.0})});
  add2("solve", "solve/curvature_scalar", solve_scalar, {Tensor::scalar(0.4)});

  add1("symeig", "symeig/eigenvalues_3x3", symeig_theta,
       {fv({1.1, 0.2, -0.4, 0.3, 2.7, 0.1, -0.2, 0.5, -1.3})});
  add2("symeig", "symeig/curvature_4x4", symeig_theta4,
       {fv({2.0, 0.3, -0.1, 0.2, 0.1, -1.0, 0.4, -0.3, 0.2, 0.1, 3.5, 0.2, -0.4, 0.3, 0.1,
            0.8})});

  add1("rootfinder", "rootfinder/sqrt", root_sqrt, {fv({2.25})});
  add1("rootfinder", "rootfinder/coupled_2d", root_coupled, {fv({1.4, 0.7})});
  add2("rootfinder", "rootfinder/curvature_sqrt", root_sqrt, {fv({2.25})});

  add1("equilibrium", "equilibrium/cosine", equil_cos, {fv({0.9})});

  add1("minimize", "minimize/cosh", min_cosh, {fv({0.6})});
  add2("minimize", "minimize/curvature_quadratic", min_quad, {fv({0.8})});

  add1("quad", "quad/exp_cos", quad_exp,
       {Tensor::scalar(0.5), Tensor::scalar(-0.3), Tensor::scalar(1.2)});
  add2("quad", "quad/curvature_poly", quad_poly, {Tensor::scalar(0.7)});

  add1("squad", "squad/trapezoid_xy", squad_trap,
       {fv({0.0, 0.15, 0.55, 1.0}), fv({0.3, -0.8, 1.4, 0.2})});
  add1("squad", "squad/simpson_y", squad_simpson, {fv({0.3, -0.8, 1.4, 0.2, -0.5})});

  {
    Tensor xs = fv({-1.0, -0.3, 0.2, 0.9, 2.0});
    Tensor ys = fv({0.4, -1.1, 0.7, 0.2, -0.5});
    Tensor qs = fv({0.11, 0.77, 1.62});
    add1("interp1d", "interp1d/linear", interp_lin, {xs, ys, qs});
    add1("interp1d", "interp1d/cubic", interp_cub, {xs, ys, qs});
  }

  add1("solve_ivp", "solve_ivp/decay", ivp_decay,
       {fv({1.0}), Tensor::scalar(0.2), Tensor::scalar(1.1)});
  add1("solve_ivp", "solve_ivp/two_body", ivp_two_body,
       {fv({0.5, 0.0, -0.5, 0.0, 0.0, 0.4, 0.0, -0.4}), Tensor::scalar(0.1)});

  add1("tampered", "tampered/sign_flipped_backward", tampered_square, {fv({0.7, -1.2})});
  return cs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference validation of the library's derivatives"};
  std::string suite = "all";
  int order = 2;
  std::uint64_t seed = 0;
  double tol = 1e-5;
  std::string out = ".";
  app.add_option("--suite", suite, "check suite to run")
      ->check(CLI::IsMember({"all", "solve", "symeig", "rootfinder", "equilibrium", "minimize",
                             "quad", "squad", "interp1d", "solve_ivp", "tampered"}))
      ->capture_default_str();
  app.add_option("--order", order, "highest derivative order to validate")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  app.add_option("--seed", seed, "cotangent seed")->capture_default_str();
  app.add_option("--tol", tol, "first-order relative tolerance")->capture_default_str();
  app.add_option("--out", out, "output directory for report.json")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (!(tol > 0)) {
    std::cerr << "error: tol must be positive\n";
    return 2;
  }
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << out << ": " << ec.message() << "\n";
    return 2;
  }

  nlohmann::json checks_json = nlohmann::json::array();
  bool all_passed = true;
  int ran = 0;
  for (const Check& c : build_checks()) {
    if (suite == "all" ? c.suite == "tampered" : c.suite != suite) continue;
    if (c.order > order) continue;
    CheckOptions opts;
    opts.seed = seed;
    opts.rtol = tol;
    // The integrator's adjoint is itself a discretized solve; hold it to the
    // looser curvature-grade tolerance.
    if (c.suite == "solve_ivp") opts.rtol = std::max(tol, 1e-4);
    CheckReport rep;
    bool threw = false;
    std::string what;
    try {
      rep = c.run(opts);
    } catch (const std::exception& e) {
      threw = true;
      what = e.what();
    }
    const bool ok = !threw && rep.passed;
    ++ran;
    all_passed = all_passed && ok;
    nlohmann::json j;
    j["name"] = c.name;
    j["order"] = c.order;
    j["passed"] = ok;
    j["max_abs_err"] = threw ? -1.0 : rep.max_abs_err;
    j["max_rel_err"] = threw ? -1.0 : rep.max_rel_err;
    checks_json.push_back(j);
    std::cout << (ok ? "PASS" : "FAIL") << "  " << c.name << " (order " << c.order << ")";
    if (threw) std::cout << "  [threw: " << what << "]";
    std::cout << "\n";
  }
  if (ran == 0) {
    std::cerr << "error: suite '" << suite << "' selected no checks at order " << order << "\n";
    return 2;
  }

  nlohmann::json report;
  report["suite"] = suite;
  report["order"] = order;
  report["seed"] = seed;
  report["tol"] = tol;
  report["checks"] = checks_json;
  report["all_passed"] = all_passed;
  std::ofstream rf(out + "/report.json");
  rf << report.dump(2) << "\n";
  if (!rf) {
    std::cerr << "error: cannot write " << out << "/report.json\n";
    return 2;
  }
  std::cout << (all_passed ? "all checks passed" : "checks FAILED") << " (" << ran << " run)\n";
  return all_passed ? 0 : 1;
}
