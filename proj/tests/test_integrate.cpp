// Integration functionals: fixed and adaptive quadrature, the IVP solver and
// its adjoint, Monte Carlo expectations, and sampled-data quadrature. Values
// are pinned to closed forms; gradients are checked against finite
// differences and the Leibniz rule.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "diffnum/gradcheck.hpp"
#include "diffnum/integrate/mcquad.hpp"
#include "diffnum/integrate/quad.hpp"
#include "diffnum/integrate/solve_ivp.hpp"
#include "diffnum/integrate/squad.hpp"
#include "diffnum/ops.hpp"
#include "doctest.h"

using namespace diffnum;
using integrate::mcquad;
using integrate::McOptions;
using integrate::quad;
using integrate::solve_ivp;
using integrate::solve_ivp_at;
using integrate::squad;
using integrate::squad_cumulative;

namespace {

constexpr double kPi = 3.14159265358979323846;

// dy/dt = -y: y(t) = y0 exp(t0 - t).
const TensorFn kDecay = [](std::span<const Tensor> in) -> Tensor { return neg(in[1]); };

// Two softened-gravity bodies in the plane; y packs [p1, p2, v1, v2] (8
// entries), params carry the softening a. F(r) = -(|r|^2 + a)^(-1/2) r_hat.
const TensorFn kTwoBody = [](std::span<const Tensor> in) -> Tensor {
  const Tensor& y = in[1];
  const Tensor& a = in[2];
  Tensor p1 = slice(y, 0, 0, 2);
  Tensor p2 = slice(y, 0, 2, 4);
  Tensor v = slice(y, 0, 4, 8);
  Tensor r = sub(p1, p2);
  Tensor r2 = sum(mul(r, r));
  Tensor f1 = neg(mul(r, div(1.0, mul(sqrt(add(r2, a)), sqrt(r2)))));
  return concat({v, f1, neg(f1)}, 0);
};

// Total energy of the pair: the potential for the force above is
// V(rho) = log(rho + sqrt(rho^2 + a)).
double two_body_energy(const Tensor& y, double a) {
  const auto d = y.data();
  const double rx = d[0] - d[2], ry = d[1] - d[3];
  const double rho = std::sqrt(rx * rx + ry * ry);
  double kin = 0.0;
  for (int i = 4; i < 8; ++i) kin += 0.5 * d[static_cast<size_t>(i)] * d[static_cast<size_t>(i)];
  return kin + std::log(rho + std::sqrt(rho * rho + a));
}

}  // namespace

TEST_CASE("quad matches closed-form integrals") {
  TensorFn ident = [](std::span<const Tensor> in) -> Tensor { return in[0]; };
  CHECK(quad(ident, Tensor::scalar(0.0), Tensor::scalar(1.0)).item() ==
        doctest::Approx(0.5).epsilon(1e-12));

  TensorFn sine = [](std::span<const Tensor> in) -> Tensor { return sin(in[0]); };
  CHECK(quad(sine, Tensor::scalar(0.0), Tensor::scalar(kPi)).item() ==
        doctest::Approx(2.0).epsilon(1e-9));

  // d/dtheta of int_0^1 theta x^2 dx = 1/3, through the adaptive path.
  TensorFn poly = [](std::span<const Tensor> in) -> Tensor {
    return mul(in[1], mul(in[0], in[0]));
  };
  Tensor th = Tensor::scalar(0.7).leaf();
  Tensor val = quad(poly, Tensor::scalar(0.0), Tensor::scalar(1.0), {&th, 1});
  CHECK(val.item() == doctest::Approx(0.7 / 3.0).epsilon(1e-10));
  CHECK(grad1(val, th).item() == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("quad bound gradients follow the Leibniz rule") {
  TensorFn sine = [](std::span<const Tensor> in) -> Tensor { return sin(in[0]); };
  Tensor a = Tensor::scalar(0.3).leaf();
  Tensor b = Tensor::scalar(2.1).leaf();
  Tensor val = quad(sine, a, b);
  CHECK(val.item() == doctest::Approx(std::cos(0.3) - std::cos(2.1)).epsilon(1e-10));
  CHECK(grad1(val, b).item() == doctest::Approx(std::sin(2.1)).epsilon(1e-8));
  CHECK(grad1(val, a).item() == doctest::Approx(-std::sin(0.3)).epsilon(1e-8));
}

TEST_CASE("quad VJP equals the derivative of the discretized sum") {
  // With a fixed panel count the value IS the discrete quadrature sum, so a
  // tight finite-difference check pins the VJP to that sum's derivative.
  SolverConfig fixed{.panels = 3};
  TensorFn wrap = [fixed](std::span<const Tensor> in) -> Tensor {
    TensorFn f = [](std::span<const Tensor> a) -> Tensor {
      return mul(exp(mul(a[0], a[1])), cos(a[0]));
    };
    return quad(f, in[1], in[2], {&in[0], 1}, fixed);
  };
  std::vector<Tensor> inputs{Tensor::scalar(0.8), Tensor::scalar(-0.2), Tensor::scalar(1.4)};
  auto rep = gradcheck(wrap, inputs, {.eps = 1e-5, .rtol = 1e-7, .atol = 1e-10});
  CHECK_MESSAGE(rep.passed, rep.summary());
}

TEST_CASE("quad adaptive subdivision agrees with brute-force panels") {
  TensorFn bump = [](std::span<const Tensor> in) -> Tensor {
    Tensor z = sub(in[0], 0.6);
    return exp(neg(mul(mul(z, z), 80.0)));
  };
  SolverConfig tight{.tol = 1e-11};
  SolverConfig brute{.panels = 256};
  double adaptive = quad(bump, Tensor::scalar(0.0), Tensor::scalar(1.0), {}, tight).item();
  double dense = quad(bump, Tensor::scalar(0.0), Tensor::scalar(1.0), {}, brute).item();
  CHECK(adaptive == doctest::Approx(dense).epsilon(1e-9));
}

TEST_CASE("quad second-order derivatives") {
  // I(theta) = int_0^1 (theta t)^2 dt = theta^2/3, so I'' = 2/3.
  TensorFn sq = [](std::span<const Tensor> in) -> Tensor {
    Tensor z = mul(in[0], in[1]);
    return mul(z, z);
  };
  Tensor th = Tensor::scalar(1.3).leaf();
  Tensor val = quad(sq, Tensor::scalar(0.0), Tensor::scalar(1.0), {&th, 1});
  Tensor d1 = grad1(val, th, {.create_graph = true});
  CHECK(d1.item() == doctest::Approx(2.0 * 1.3 / 3.0).epsilon(1e-9));
  CHECK(grad1(d1, th).item() == doctest::Approx(2.0 / 3.0).epsilon(1e-8));

  TensorFn wrap = [](std::span<const Tensor> in) -> Tensor {
    TensorFn f = [](std::span<const Tensor> a) -> Tensor {
      Tensor z = mul(a[0], a[1]);
      return mul(z, z);
    };
    return quad(f, Tensor::scalar(0.0), Tensor::scalar(1.0), {&in[0], 1});
  };
  Tensor t2 = Tensor::scalar(1.3);
  auto rep = gradgradcheck(wrap, {&t2, 1});
  CHECK_MESSAGE(rep.passed, rep.summary());
}

TEST_CASE("quad enforces its budget") {
  TensorFn spike = [](std::span<const Tensor> in) -> Tensor { return pow(in[0], -0.9); };
  SolverConfig starved{.tol = 1e-12, .max_steps = 8};
  CHECK_THROWS_AS(quad(spike, Tensor::scalar(0.0), Tensor::scalar(1.0), {}, starved),
                  SolverError);
  TensorFn ident = [](std::span<const Tensor> in) -> Tensor { return in[0]; };
  CHECK_THROWS_AS(quad(ident, Tensor::zeros({2}), Tensor::scalar(1.0)), ShapeError);
}

TEST_CASE("quad integrates vector-valued integrands elementwise") {
  TensorFn pair = [](std::span<const Tensor> in) -> Tensor {
    return concat({reshape(in[0], {1}), reshape(mul(in[0], in[0]), {1})}, 0);
  };
  Tensor val = quad(pair, Tensor::scalar(0.0), Tensor::scalar(1.0));
  REQUIRE(val.shape() == Shape{2});
  CHECK(val.data()[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(val.data()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("solve_ivp reproduces closed-form solutions") {
  // dy/dt = 0: the state never moves and the map is the identity.
  TensorFn still = [](std::span<const Tensor> in) -> Tensor {
    return mul(in[1], 0.0);
  };
  Tensor y0 = Tensor::from_vector({2}, {0.3, -1.7}).leaf();
  Tensor y1 = solve_ivp(still, y0, Tensor::scalar(0.0), Tensor::scalar(1.0));
  CHECK(y1.data()[0] == 0.3);
  CHECK(y1.data()[1] == -1.7);
  Tensor g0 = grad1(index(y1, 0), y0);
  CHECK(g0.data()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g0.data()[1] == doctest::Approx(0.0).epsilon(1e-12));

  // dy/dt = -y from 1: e^{-1}, with matching adjoint sensitivity.
  Tensor one = Tensor::scalar(1.0).leaf();
  Tensor yd = solve_ivp(kDecay, one, Tensor::scalar(0.0), Tensor::scalar(1.0));
  CHECK(yd.item() == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(grad1(yd, one).item() == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));

  // dy/dt = theta from 0 over unit time: y1 = theta, dy1/dtheta = 1.
  TensorFn drift = [](std::span<const Tensor> in) -> Tensor { return in[2]; };
  Tensor th = Tensor::scalar(-0.6).leaf();
  Tensor ylin = solve_ivp(drift, Tensor::scalar(0.0), Tensor::scalar(0.0), Tensor::scalar(1.0),
                          {&th, 1});
  CHECK(ylin.item() == doctest::Approx(-0.6).epsilon(1e-9));
  CHECK(grad1(ylin, th).item() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solve_ivp adjoint matches finite differences") {
  SolverConfig tight{.rtol = 1e-10, .atol = 1e-12};

  // Decay, differentiated wrt y0 and both endpoints.
  TensorFn decay_wrap = [tight](std::span<const Tensor> in) -> Tensor {
    return solve_ivp(kDecay, in[0], in[1], in[2], {}, tight);
  };
  std::vector<Tensor> din{Tensor::scalar(1.0), Tensor::scalar(0.2), Tensor::scalar(1.1)};
  auto rep = gradcheck(decay_wrap, din, {.rtol = 1e-4});
  CHECK_MESSAGE(rep.passed, rep.summary());

  // Two-body instance: wrt the packed initial state and the softening.
  TensorFn body_wrap = [tight](std::span<const Tensor> in) -> Tensor {
    return solve_ivp(kTwoBody, in[0], Tensor::scalar(0.0), Tensor::scalar(1.0), {&in[1], 1},
                     tight);
  };
  std::vector<Tensor> bin{
      Tensor::from_vector({8}, {0.5, 0.0, -0.5, 0.0, 0.0, 0.4, 0.0, -0.4}),
      Tensor::scalar(0.1)};
  auto rep2 = gradcheck(body_wrap, bin, {.rtol = 1e-4});
  CHECK_MESSAGE(rep2.passed, rep2.summary());
}

TEST_CASE("solve_ivp conserves energy and reverses cleanly") {
  Tensor y0 = Tensor::from_vector({8}, {0.5, 0.0, -0.5, 0.0, 0.0, 0.4, 0.0, -0.4});
  Tensor a = Tensor::scalar(0.1);
  Tensor y1 = solve_ivp(kTwoBody, y0, Tensor::scalar(0.0), Tensor::scalar(1.0), {&a, 1});
  const double e0 = two_body_energy(y0, 0.1);
  const double e1 = two_body_energy(y1, 0.1);
  CHECK(std::abs(e1 - e0) <= 1e-4 * std::abs(e0));

  // Integrate back down to t = 0 and compare with where we started.
  Tensor back = solve_ivp(kTwoBody, y1, Tensor::scalar(1.0), Tensor::scalar(0.0), {&a, 1});
  for (int i = 0; i < 8; ++i)
    CHECK(back.data()[static_cast<size_t>(i)] ==
          doctest::Approx(y0.data()[static_cast<size_t>(i)]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("solve_ivp_at lands on requested times") {
  Tensor one = Tensor::scalar(1.0).leaf();
  std::vector<double> times{0.25, 0.5, 0.75};
  auto sol = solve_ivp_at(kDecay, one, Tensor::scalar(0.0), Tensor::scalar(1.0), times);
  REQUIRE(sol.snapshots.size() == 3);
  for (size_t i = 0; i < times.size(); ++i) {
    CHECK(sol.snapshots[i].item() == doctest::Approx(std::exp(-times[i])).epsilon(1e-6));
    CHECK(!sol.snapshots[i].has_node());  // snapshots are plain values
  }
  CHECK(sol.y1.item() == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(grad1(sol.y1, one).item() == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));

  std::vector<double> unsorted{0.5, 0.25};
  CHECK_THROWS_AS(
      solve_ivp_at(kDecay, one, Tensor::scalar(0.0), Tensor::scalar(1.0), unsorted),
      std::invalid_argument);
  std::vector<double> outside{1.5};
  CHECK_THROWS_AS(
      solve_ivp_at(kDecay, one, Tensor::scalar(0.0), Tensor::scalar(1.0), outside),
      std::invalid_argument);
}

TEST_CASE("solve_ivp error contracts") {
  SolverConfig starved{.max_steps = 3};
  CHECK_THROWS_AS(
      solve_ivp(kDecay, Tensor::scalar(1.0), Tensor::scalar(0.0), Tensor::scalar(50.0), {},
                starved),
      SolverError);

  // dy/dt = y^2 from 3 blows up at t = 1/3, inside the integration window.
  TensorFn burst = [](std::span<const Tensor> in) -> Tensor { return mul(in[1], in[1]); };
  CHECK_THROWS_AS(
      solve_ivp(burst, Tensor::scalar(3.0), Tensor::scalar(0.0), Tensor::scalar(1.0)),
      SolverError);

  TensorFn bad_shape = [](std::span<const Tensor> in) -> Tensor {
    return broadcast_to(reshape(in[1], {1}), {2});
  };
  CHECK_THROWS_AS(
      solve_ivp(bad_shape, Tensor::scalar(1.0), Tensor::scalar(0.0), Tensor::scalar(1.0)),
      ShapeError);
}

TEST_CASE("mcquad estimates a Gaussian mean and its score gradient") {
  // E[x] for x ~ Normal(mu, 1) with f(x) = x: value near mu, d/dmu near 1,
  // judged against 5 iid standard errors at N = 10^4.
  const int n = 10000;
  TensorFn ident = [](std::span<const Tensor> in) -> Tensor { return in[0]; };
  TensorFn gauss = [](std::span<const Tensor> in) -> Tensor {
    Tensor z = sub(in[0], in[1]);
    return mul(sum(mul(z, z)), -0.5);
  };
  Tensor mu = Tensor::scalar(2.0).leaf();
  McOptions opts{.n_samples = n, .n_burnin = 1000, .proposal_scale = 2.4, .seed = 0};
  Tensor est = mcquad(ident, gauss, Tensor::scalar(2.0), {}, {&mu, 1}, opts);
  const double se_mean = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(est.item() - 2.0) <= 5.0 * se_mean);
  const double se_grad = std::sqrt(2.0) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(grad1(est, mu).item() - 1.0) <= 5.0 * se_grad);
}

TEST_CASE("mcquad is exact for constants and deterministic per seed") {
  TensorFn constf = [](std::span<const Tensor> in) -> Tensor { return mul(in[1], 1.0); };
  TensorFn gauss = [](std::span<const Tensor> in) -> Tensor {
    Tensor z = sub(in[0], in[1]);
    return mul(sum(mul(z, z)), -0.5);
  };
  Tensor c = Tensor::scalar(4.25).leaf();
  Tensor mu = Tensor::scalar(0.0).leaf();
  McOptions opts{.n_samples = 200, .n_burnin = 50, .seed = 7};
  Tensor est = mcquad(constf, gauss, Tensor::scalar(0.0), {&c, 1}, {&mu, 1}, opts);
  CHECK(est.item() == 4.25);  // mean of a constant, no float drift
  CHECK(grad1(est, c).item() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(grad1(est, mu).item() == 0.0);  // f - y vanishes sample by sample

  TensorFn ident = [](std::span<const Tensor> in) -> Tensor { return in[0]; };
  McOptions o1{.n_samples = 500, .n_burnin = 100, .seed = 11};
  McOptions o2 = o1;
  double run1 = mcquad(ident, gauss, Tensor::scalar(0.0), {}, {&mu, 1}, o1).item();
  double run2 = mcquad(ident, gauss, Tensor::scalar(0.0), {}, {&mu, 1}, o2).item();
  CHECK(run1 == run2);
  McOptions o3 = o1;
  o3.seed = 12;
  CHECK(run1 != mcquad(ident, gauss, Tensor::scalar(0.0), {}, {&mu, 1}, o3).item());
}

TEST_CASE("mcquad error contracts") {
  TensorFn ident = [](std::span<const Tensor> in) -> Tensor { return in[0]; };
  // log p = log(x): NaN as soon as a proposal crosses zero.
  TensorFn logx = [](std::span<const Tensor> in) -> Tensor { return log(in[0]); };
  CHECK_THROWS_AS(mcquad(ident, logx, Tensor::scalar(0.05), {}, {},
                         {.n_samples = 50, .n_burnin = 200, .seed = 1}),
                  SolverError);

  // A astronomically peaked density rejects every proposal during burn-in.
  TensorFn wall = [](std::span<const Tensor> in) -> Tensor {
    return mul(sum(mul(in[0], in[0])), -1e9);
  };
  CHECK_THROWS_AS(mcquad(ident, wall, Tensor::scalar(0.0), {}, {},
                         {.n_samples = 10, .n_burnin = 100, .seed = 2}),
                  SolverError);

  TensorFn vecp = [](std::span<const Tensor> in) -> Tensor { return mul(in[0], -1.0); };
  CHECK_THROWS_AS(mcquad(ident, vecp, Tensor::from_vector({2}, {0.0, 0.0}), {}, {},
                         {.n_samples = 10, .n_burnin = 10}),
                  ShapeError);
  CHECK_THROWS_AS(mcquad(ident, logx, Tensor::scalar(1.0), {}, {}, {.n_samples = 0}),
                  std::invalid_argument);
}

TEST_CASE("squad integrates sampled data") {
  // 11 uniform nodes: Simpson is exact for linears and quadratics.
  std::vector<double> xs(11), lin(11), sq(11);
  for (int i = 0; i <= 10; ++i) {
    xs[static_cast<size_t>(i)] = 0.1 * i;
    lin[static_cast<size_t>(i)] = 0.1 * i;
    sq[static_cast<size_t>(i)] = 0.01 * i * i;
  }
  Tensor x = Tensor::from_vector({11}, xs);
  CHECK(squad(x, Tensor::from_vector({11}, lin)).item() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(squad(x, Tensor::from_vector({11}, sq)).item() ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  // Two nodes force a single trapezoid.
  Tensor x2 = Tensor::from_vector({2}, {1.0, 3.0});
  Tensor y2 = Tensor::from_vector({2}, {2.0, 4.0});
  CHECK(squad(x2, y2).item() == doctest::Approx(6.0).epsilon(1e-15));

  // Non-uniform nodes fall back to the trapezoid rule (exact for linears).
  Tensor xn = Tensor::from_vector({4}, {0.0, 0.1, 0.4, 1.0});
  Tensor yn = Tensor::from_vector({4}, {0.0, 0.1, 0.4, 1.0});
  CHECK(squad(xn, yn).item() == doctest::Approx(0.5).epsilon(1e-14));

  // Even node count: Simpson head plus one trapezoid tail, composed by hand.
  std::vector<double> xe(4), ye(4);
  for (int i = 0; i < 4; ++i) {
    xe[static_cast<size_t>(i)] = i / 3.0;
    ye[static_cast<size_t>(i)] = xe[static_cast<size_t>(i)] * xe[static_cast<size_t>(i)];
  }
  const double h = 1.0 / 3.0;
  const double head = h / 3.0 * (ye[0] + 4.0 * ye[1] + ye[2]);
  const double tail = 0.5 * h * (ye[2] + ye[3]);
  CHECK(squad(Tensor::from_vector({4}, xe), Tensor::from_vector({4}, ye)).item() ==
        doctest::Approx(head + tail).epsilon(1e-14));
}

TEST_CASE("squad handles the node axis of rank-2 data") {
  Tensor x = Tensor::from_vector({3}, {0.0, 0.5, 1.0});
  // Columns: y = x and y = 2 - x.
  Tensor y0 = Tensor::from_vector({3, 2}, {0.0, 2.0, 0.5, 1.5, 1.0, 1.0});
  Tensor r0 = squad(x, y0, 0);
  REQUIRE(r0.shape() == Shape{2});
  CHECK(r0.data()[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r0.data()[1] == doctest::Approx(1.5).epsilon(1e-14));
  Tensor r1 = squad(x, transpose(y0), 1);
  REQUIRE(r1.shape() == Shape{2});
  CHECK(r1.data()[0] == doctest::Approx(r0.data()[0]).epsilon(1e-15));
  CHECK(r1.data()[1] == doctest::Approx(r0.data()[1]).epsilon(1e-15));
}

TEST_CASE("squad weight construction differentiates") {
  // Uniform branch: for constant samples the integral is the node span, so
  // d/dx is -1 at the left end, +1 at the right end, 0 inside.
  std::vector<double> xs(5);
  for (int i = 0; i < 5; ++i) xs[static_cast<size_t>(i)] = 0.25 * i;
  Tensor xu = Tensor::from_vector({5}, xs).leaf();
  Tensor ones = Tensor::from_vector({5}, std::vector<double>(5, 1.0));
  Tensor gspan = grad1(squad(xu, ones), xu);
  CHECK(gspan.data()[0] == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(gspan.data()[4] == doctest::Approx(1.0).epsilon(1e-13));
  for (int i = 1; i < 4; ++i)
    CHECK(gspan.data()[static_cast<size_t>(i)] == doctest::Approx(0.0).epsilon(1e-13));

  // Simpson branch, gradient wrt samples only (the scheme choice pins x).
  Tensor ysq = Tensor::from_vector({5}, {0.0, 0.0625, 0.25, 0.5625, 1.0});
  TensorFn wrap_y = [xu](std::span<const Tensor> in) -> Tensor { return squad(xu, in[0]); };
  auto rep = gradcheck(wrap_y, {&ysq, 1});
  CHECK_MESSAGE(rep.passed, rep.summary());

  // Trapezoid branch stays on its branch under perturbation: check x and y.
  TensorFn wrap_xy = [](std::span<const Tensor> in) -> Tensor { return squad(in[0], in[1]); };
  std::vector<Tensor> inputs{Tensor::from_vector({4}, {0.0, 0.15, 0.55, 1.0}),
                             Tensor::from_vector({4}, {0.3, -0.2, 0.8, 0.1})};
  auto rep2 = gradcheck(wrap_xy, inputs);
  CHECK_MESSAGE(rep2.passed, rep2.summary());
}

TEST_CASE("squad_cumulative is a trapezoid prefix sum") {
  Tensor x = Tensor::from_vector({5}, {0.0, 0.25, 0.5, 0.75, 1.0});
  Tensor y = Tensor::from_vector({5}, {0.0, 0.25, 0.5, 0.75, 1.0});
  Tensor c = squad_cumulative(x, y);
  REQUIRE(c.shape() == Shape{5});
  CHECK(c.data()[0] == 0.0);  // empty prefix
  for (int k = 1; k < 5; ++k) {
    const double t = 0.25 * k;
    CHECK(c.data()[static_cast<size_t>(k)] == doctest::Approx(0.5 * t * t).epsilon(1e-14));
  }

  // The last prefix equals the definite trapezoid integral (non-uniform x).
  Tensor xn = Tensor::from_vector({4}, {0.0, 0.15, 0.55, 1.0});
  Tensor yn = Tensor::from_vector({4}, {0.3, -0.2, 0.8, 0.1});
  Tensor cn = squad_cumulative(xn, yn);
  CHECK(cn.data()[3] == doctest::Approx(squad(xn, yn).item()).epsilon(1e-14));

  // Rank-2 data along both axes.
  Tensor y2 = Tensor::from_vector({4, 2}, {0.3, 1.0, -0.2, 1.0, 0.8, 1.0, 0.1, 1.0});
  Tensor c2 = squad_cumulative(xn, y2, 0);
  REQUIRE(c2.shape() == Shape{4, 2});
  CHECK(c2.data()[6] == doctest::Approx(cn.data()[3]).epsilon(1e-14));
  CHECK(c2.data()[7] == doctest::Approx(1.0).epsilon(1e-14));
  Tensor c2t = squad_cumulative(xn, transpose(y2), 1);
  REQUIRE(c2t.shape() == Shape{2, 4});
  CHECK(c2t.data()[3] == doctest::Approx(cn.data()[3]).epsilon(1e-14));

  TensorFn wrap = [](std::span<const Tensor> in) -> Tensor {
    return sum(squad_cumulative(in[0], in[1]));
  };
  std::vector<Tensor> inputs{xn, yn};
  auto rep = gradcheck(wrap, inputs);
  CHECK_MESSAGE(rep.passed, rep.summary());
}

TEST_CASE("squad input validation") {
  Tensor good = Tensor::from_vector({3}, {0.0, 0.5, 1.0});
  Tensor y3 = Tensor::from_vector({3}, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(squad(Tensor::from_vector({3}, {0.0, 0.5, 0.5}), y3), std::invalid_argument);
  CHECK_THROWS_AS(squad(Tensor::from_vector({3}, {0.0, 0.7, 0.5}), y3), std::invalid_argument);
  CHECK_THROWS_AS(squad(Tensor::from_vector({1}, {0.0}), Tensor::from_vector({1}, {1.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(squad(good, Tensor::from_vector({4}, {1.0, 2.0, 3.0, 4.0})), ShapeError);
  CHECK_THROWS_AS(squad(good, y3, 1), ShapeError);
  CHECK_THROWS_AS(squad(good, Tensor::scalar(1.0)), ShapeError);
  CHECK_THROWS_AS(squad_cumulative(good, Tensor::from_vector({2, 2}, {1.0, 2.0, 3.0, 4.0})),
                  ShapeError);
}
