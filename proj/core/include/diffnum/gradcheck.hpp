#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "diffnum/autograd.hpp"
#include "diffnum/tensor.hpp"

namespace diffnum {

struct CheckOptions {
  double eps = 1e-6;
  double rtol = 1e-5;
  double atol = 1e-7;
  std::uint64_t seed = 0;  // cotangent draw for gradgradcheck
};

struct CheckFailure {
  std::size_t input;        // which input tensor
  std::int64_t input_elem;  // flat element within it
  std::int64_t output_elem;
  double analytic;
  double numeric;
};

struct CheckReport {
  bool passed = true;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  std::vector<CheckFailure> failures;

  std::string summary() const;
};

/// Compares the analytic Jacobian of f (rows via vjp against basis cotangents)
/// with central finite differences, elementwise: pass iff
/// |analytic - numeric| <= atol + rtol*|numeric|. Non-finite entries on either
/// side fail with their location.
CheckReport gradcheck(const TensorFn& f, std::span<const Tensor> inputs,
                      const CheckOptions& opts = {});

/// gradcheck applied to x -> d<f(x), v>/dx (v a fixed seeded cotangent, gradient
/// built with create_graph), i.e. a second-derivative check.
CheckReport gradgradcheck(const TensorFn& f, std::span<const Tensor> inputs,
                          const CheckOptions& opts = {.eps = 1e-6, .rtol = 1e-4, .atol = 1e-7});

}  // namespace diffnum
