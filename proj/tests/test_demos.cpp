#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "demo_common.hpp"
#include "diffnum/autograd.hpp"
#include "diffnum/integrate/solve_ivp.hpp"
#include "diffnum/ops.hpp"
#include "doctest.h"

using namespace diffnum;

namespace {

// Single linear layer z = w.x + b, weights given row-major.
std::vector<Tensor> linear_surface(double wx, double wy, double b) {
  return {Tensor::from_vector({1, 2}, {wx, wy}), Tensor::from_vector({1}, {b})};
}

Tensor vec3(double x, double y, double z) { return Tensor::from_vector({3}, {x, y, z}); }

}  // namespace

TEST_CASE("flat mirror reflects a vertical ray back on itself") {
  // z = 0 everywhere; the normal is straight down and a vertical ray must
  // come back vertical (specular identity).
  auto params = linear_surface(0.0, 0.0, 0.0);
  Tensor o = vec3(0.3, 0.2, -1.5);
  Tensor d = vec3(0.0, 0.0, 1.0);
  Tensor target = vec3(0.3, 0.2, -1.5);
  std::array<double, 6> pts{};
  Tensor loss = demos::trace_ray(params, o, d, target, -1.5, {.tol = 1e-12}, &pts);
  CHECK(pts[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(pts[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(pts[2]) < 1e-10);  // hits the surface z = 0
  // Vertical reflection: the plane hit shares x, y with the mirror hit.
  CHECK(pts[3] == doctest::Approx(pts[0]).epsilon(1e-12));
  CHECK(pts[4] == doctest::Approx(pts[1]).epsilon(1e-12));
  CHECK(pts[5] == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(loss.item() == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("45 degree plane turns a horizontal ray vertical") {
  // Surface z = x is a 45-degree plane through the origin. A horizontal ray
  // along +x hits it at the origin and leaves straight up.
  auto params = linear_surface(1.0, 0.0, 0.0);
  Tensor o = vec3(-1.0, 0.0, 0.0);
  Tensor d = vec3(1.0, 0.0, 0.0);
  Tensor target = vec3(0.0, 0.0, 1.5);
  std::array<double, 6> pts{};
  Tensor loss = demos::trace_ray(params, o, d, target, 1.5, {.tol = 1e-12}, &pts);
  CHECK(std::abs(pts[0]) < 1e-10);
  CHECK(std::abs(pts[1]) < 1e-10);
  CHECK(std::abs(pts[2]) < 1e-10);
  CHECK(std::abs(pts[3]) < 1e-9);
  CHECK(std::abs(pts[4]) < 1e-9);
  CHECK(pts[5] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(loss.item() < 1e-18);
}

TEST_CASE("reflection preserves the direction norm") {
  Tensor d = vec3(1.0 / std::sqrt(3.0), -1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0));
  const double nn = std::sqrt(0.2 * 0.2 + 0.3 * 0.3 + 1.0);
  Tensor nhat = vec3(0.2 / nn, 0.3 / nn, -1.0 / nn);
  Tensor r = demos::reflect(d, nhat);
  const auto rv = r.data();
  const double norm = std::sqrt(rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pairwise force is equal and opposite") {
  Tensor pos = Tensor::from_vector({2, 2}, {0.0, 0.0, 1.0, 0.0});
  Tensor f = demos::md_force(pos, Tensor::scalar(0.1));
  const auto fd = f.data();
  // Attraction along +x on the left particle, magnitude (d^2 + a)^{-1/2}.
  const double mag = 1.0 / std::sqrt(1.1);
  CHECK(fd[0] == doctest::Approx(mag).epsilon(1e-14));
  CHECK(fd[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fd[2] == doctest::Approx(-mag).epsilon(1e-14));
  CHECK(fd[3] == doctest::Approx(0.0).epsilon(1e-14));
}

namespace {

TensorFn md_dynamics(int n, Tensor a) {
  return [n, a](std::span<const Tensor> in) -> Tensor {
    const Tensor& y = in[1];
    Tensor pos = reshape(slice(y, 0, 0, 2 * n), {n, 2});
    Tensor vel = slice(y, 0, 2 * n, 4 * n);
    Tensor acc = reshape(demos::md_force(pos, a), {2 * n});
    return concat({vel, acc}, 0);
  };
}

}  // namespace

TEST_CASE("two symmetric particles stay mirror images") {
  // p1 = -p0 and v1 = -v0 is preserved by the pairwise force, so the
  // trajectory keeps the exchange+reflection symmetry.
  const int n = 2;
  Tensor y0 = Tensor::from_vector({4 * n}, {-0.5, 0.1, 0.5, -0.1,   // positions
                                            0.1, 0.4, -0.1, -0.4});  // velocities
  SolverConfig cfg{.rtol = 1e-10, .atol = 1e-12};
  Tensor y1 = integrate::solve_ivp(md_dynamics(n, Tensor::scalar(0.1)), y0, Tensor::scalar(0.0),
                                   Tensor::scalar(1.0), {}, cfg);
  const auto yv = y1.data();
  for (int c = 0; c < 2; ++c) {
    CHECK(yv[c] == doctest::Approx(-yv[2 + c]).epsilon(1e-9));          // positions
    CHECK(yv[4 + c] == doctest::Approx(-yv[6 + c]).epsilon(1e-9));      // velocities
  }
}

TEST_CASE("free flight with v0 = target - x0 hits exactly") {
  const int n = 3;
  std::vector<double> p0{-0.2, 0.0, 0.4, 0.3, 0.1, -0.5};
  std::vector<double> tgt{1.0, -1.0, 0.0, 1.0, -1.0, 1.0};
  std::vector<double> y0v(4 * n);
  for (int i = 0; i < 2 * n; ++i) {
    y0v[i] = p0[i];
    y0v[2 * n + i] = tgt[i] - p0[i];
  }
  TensorFn free_dyn = [n](std::span<const Tensor> in) -> Tensor {
    return concat({slice(in[1], 0, 2 * n, 4 * n), Tensor::zeros({2 * n})}, 0);
  };
  Tensor y1 = integrate::solve_ivp(free_dyn, Tensor::from_vector({4 * n}, y0v),
                                   Tensor::scalar(0.0), Tensor::scalar(1.0), {},
                                   {.rtol = 1e-10, .atol = 1e-12});
  const auto yv = y1.data();
  for (int i = 0; i < 2 * n; ++i) CHECK(yv[i] == doctest::Approx(tgt[i]).epsilon(1e-10));
}

TEST_CASE("interacting particles conserve total momentum") {
  const int n = 3;
  Tensor y0 = Tensor::from_vector(
      {4 * n}, {0.0, 0.0, 0.7, 0.1, -0.3, 0.6,          // positions
                0.05, -0.2, 0.1, 0.3, -0.25, 0.0});     // velocities
  Tensor y1 = integrate::solve_ivp(md_dynamics(n, Tensor::scalar(0.1)), y0, Tensor::scalar(0.0),
                                   Tensor::scalar(1.0), {}, {.rtol = 1e-10, .atol = 1e-12});
  const auto a = y0.data();
  const auto b = y1.data();
  double m0[2] = {0, 0}, m1[2] = {0, 0};
  for (int k = 0; k < n; ++k)
    for (int c = 0; c < 2; ++c) {
      m0[c] += a[2 * n + 2 * k + c];
      m1[c] += b[2 * n + 2 * k + c];
    }
  CHECK(m1[0] == doctest::Approx(m0[0]).epsilon(1e-9));
  CHECK(m1[1] == doctest::Approx(m0[1]).epsilon(1e-9));
}

TEST_CASE("csv writer and reader round-trip") {
  namespace fs = std::filesystem;
  const fs::path tmp = fs::temp_directory_path() / "diffnum_demo_csv_test.csv";
  {
    demos::CsvWriter w(tmp.string(), {"x", "y"});
    REQUIRE(w.ok());
    const double r0[2] = {0.1, -2.5};
    const double r1[2] = {1.0 / 3.0, 1e-17};
    w.row(r0);
    w.row(r1);
  }
  auto pts = demos::read_xy_csv(tmp.string());
  REQUIRE(pts.size() == 2);
  CHECK(pts[0][0] == 0.1);
  CHECK(pts[0][1] == -2.5);
  CHECK(pts[1][0] == 1.0 / 3.0);  // %.17g keeps doubles bit-exact
  CHECK(pts[1][1] == 1e-17);
  fs::remove(tmp);
}
