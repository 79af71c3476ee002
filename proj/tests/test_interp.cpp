// 1-D interpolation: node exactness, closed-form pieces, a dense-grid oracle
// for the cubic kind, monotonicity, and finite-difference gradient checks.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "diffnum/gradcheck.hpp"
#include "diffnum/interp/interp1d.hpp"
#include "diffnum/ops.hpp"
#include "diffnum/rng.hpp"
#include "doctest.h"

using namespace diffnum;
using interp::Extrapolation;
using interp::interp1d;
using interp::InterpKind;

TEST_CASE("interp1d reproduces nodes exactly") {
  Tensor x = Tensor::from_vector({5}, {-1.0, -0.3, 0.2, 0.9, 2.0});
  Tensor y = Tensor::from_vector({5}, {0.4, -1.1, 0.7, 0.2, -0.5});
  for (auto kind : {InterpKind::linear, InterpKind::cubic}) {
    Tensor at_nodes = interp1d(x, y, x, kind);
    for (size_t i = 0; i < 5; ++i) CHECK(at_nodes.data()[i] == y.data()[i]);
  }
}

TEST_CASE("interp1d linear pieces") {
  Tensor x = Tensor::from_vector({2}, {0.0, 1.0});
  Tensor y = Tensor::from_vector({2}, {0.0, 1.0});
  CHECK(interp1d(x, y, Tensor::scalar(0.5)).item() == doctest::Approx(0.5).epsilon(1e-15));

  // Linear data stays linear under the linear kind at arbitrary queries.
  Tensor xs = Tensor::from_vector({4}, {0.0, 0.4, 1.1, 2.0});
  Tensor ys = Tensor::from_vector({4}, {1.0, 1.8, 3.2, 5.0});  // y = 2x + 1
  Tensor q = Tensor::from_vector({3}, {0.2, 0.9, 1.7});
  Tensor p = interp1d(xs, ys, q, InterpKind::linear);
  for (size_t i = 0; i < 3; ++i)
    CHECK(p.data()[i] == doctest::Approx(2.0 * q.data()[i] + 1.0).epsilon(1e-14));
}

TEST_CASE("interp1d cubic tracks a dense-grid oracle on y = x^3") {
  std::vector<double> xs(5), ys(5);
  for (int i = 0; i < 5; ++i) {
    xs[static_cast<size_t>(i)] = 0.25 * i;
    ys[static_cast<size_t>(i)] = xs[static_cast<size_t>(i)] * xs[static_cast<size_t>(i)] *
                                 xs[static_cast<size_t>(i)];
  }
  Tensor x = Tensor::from_vector({5}, xs);
  Tensor y = Tensor::from_vector({5}, ys);
  std::vector<double> mids{0.125, 0.375, 0.625, 0.875};
  Tensor p = interp1d(x, y, Tensor::from_vector({4}, mids), InterpKind::cubic);
  for (size_t i = 0; i < mids.size(); ++i)
    CHECK(std::abs(p.data()[i] - mids[i] * mids[i] * mids[i]) <= 5e-2);
}

TEST_CASE("interp1d cubic preserves monotone data") {
  // Strictly increasing samples with wildly uneven slopes; the limited
  // tangents must keep every piece non-decreasing.
  Tensor x = Tensor::from_vector({6}, {0.0, 0.2, 0.5, 1.1, 1.3, 2.0});
  Tensor y = Tensor::from_vector({6}, {0.0, 0.01, 2.0, 2.02, 2.03, 5.0});
  std::vector<double> qs(201);
  for (int i = 0; i <= 200; ++i) qs[static_cast<size_t>(i)] = 2.0 * i / 200.0;
  Tensor p = interp1d(x, y, Tensor::from_vector({201}, qs), InterpKind::cubic);
  for (size_t i = 0; i + 1 < qs.size(); ++i)
    CHECK(p.data()[i + 1] - p.data()[i] >= -1e-12);
}

TEST_CASE("interp1d differentiates wrt table and queries") {
  Tensor x = Tensor::from_vector({5}, {0.0, 0.3, 0.8, 1.4, 2.0});
  Tensor y = Tensor::from_vector({5}, {0.1, 0.5, 0.9, 1.8, 2.2});  // monotone, generic
  Tensor q = Tensor::from_vector({3}, {0.11, 0.77, 1.62});

  for (auto kind : {InterpKind::linear, InterpKind::cubic}) {
    TensorFn wrap = [kind](std::span<const Tensor> in) -> Tensor {
      return interp1d(in[0], in[1], in[2], kind);
    };
    std::vector<Tensor> inputs{x, y, q};
    auto rep = gradcheck(wrap, inputs);
    CHECK_MESSAGE(rep.passed, rep.summary());
  }

  // Second derivatives wrt the query flow through the Hermite polynomial.
  TensorFn cubic_q = [x, y](std::span<const Tensor> in) -> Tensor {
    return interp1d(x, y, in[0], InterpKind::cubic);
  };
  auto rep2 = gradgradcheck(cubic_q, {&q, 1});
  CHECK_MESSAGE(rep2.passed, rep2.summary());
}

TEST_CASE("interp1d extrapolation policies") {
  Tensor x = Tensor::from_vector({3}, {0.0, 1.0, 2.0});
  Tensor y = Tensor::from_vector({3}, {1.0, 3.0, 2.0});
  CHECK_THROWS_AS(interp1d(x, y, Tensor::scalar(-0.1)), std::out_of_range);
  CHECK_THROWS_AS(interp1d(x, y, Tensor::scalar(2.3)), std::out_of_range);

  Tensor ql = Tensor::scalar(-5.0).leaf();
  Tensor pl = interp1d(x, y, ql, InterpKind::linear, Extrapolation::clamp);
  CHECK(pl.item() == 1.0);
  CHECK(grad1(pl, ql).item() == 0.0);  // clamped queries are flat
  Tensor qr = Tensor::scalar(7.0);
  CHECK(interp1d(x, y, qr, InterpKind::cubic, Extrapolation::clamp).item() == 2.0);
}

TEST_CASE("interp1d input validation") {
  Tensor y3 = Tensor::from_vector({3}, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(interp1d(Tensor::from_vector({3}, {0.0, 0.5, 0.5}), y3, Tensor::scalar(0.2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(interp1d(Tensor::from_vector({3}, {0.0, 0.7, 0.5}), y3, Tensor::scalar(0.2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(interp1d(Tensor::from_vector({1}, {0.0}), Tensor::from_vector({1}, {1.0}),
                           Tensor::scalar(0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      interp1d(Tensor::from_vector({3}, {0.0, 1.0, 2.0}), Tensor::from_vector({2}, {1.0, 2.0}),
               Tensor::scalar(0.5)),
      ShapeError);
  CHECK_THROWS_AS(interp1d(Tensor::from_vector({2, 2}, {0.0, 1.0, 2.0, 3.0}), y3,
                           Tensor::scalar(0.5)),
                  ShapeError);
}
