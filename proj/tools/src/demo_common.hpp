#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "diffnum/config.hpp"
#include "diffnum/tensor.hpp"

namespace demos {

// Small fully connected network: weights alternate W {out, in} and b {out}.
// Softplus after every layer except the last, matching the mirror surface
// descriptor. Layer widths: in -> hidden... -> out.
struct Mlp {
  std::vector<diffnum::Tensor> params;
  std::vector<std::int64_t> sizes;
};

// Kaiming-style uniform init, U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
Mlp make_mlp(const std::vector<std::int64_t>& sizes, std::uint64_t seed);

// Forward pass on a rank-1 input; params may be the Mlp's own tensors or
// leaf/alias rebindings of them (the shapes carry the layer structure).
diffnum::Tensor mlp_forward(std::span<const diffnum::Tensor> params, const diffnum::Tensor& in);

// Specular reflection of d about the unit normal nhat: d - 2 (d.nhat) nhat.
diffnum::Tensor reflect(const diffnum::Tensor& d, const diffnum::Tensor& nhat);

// Traces one ray from origin along dir onto the surface z = mlp(x, y),
// reflects it off the local normal (from the network's input gradient), and
// propagates to the plane z = plane_z. Returns the squared deviation of the
// plane hit from target, differentiable through the root find and the
// normal. With hits, also reports the mirror and plane intersection points.
// Throws SolverError when the root find fails, the intersection lies behind
// the origin, or the reflected ray never reaches the plane.
diffnum::Tensor trace_ray(std::span<const diffnum::Tensor> surface_params,
                          const diffnum::Tensor& origin, const diffnum::Tensor& dir,
                          const diffnum::Tensor& target, double plane_z,
                          const diffnum::SolverConfig& rootcfg,
                          std::array<double, 6>* hits = nullptr);

// Pairwise softened attraction on {n, 2} positions:
// F_i = sum_{j != i} -(|r_ij|^2 + a)^(-1/2) r_hat_ij with r_ij = p_i - p_j.
diffnum::Tensor md_force(const diffnum::Tensor& positions, const diffnum::Tensor& a);

// CSV with a header row and %.17g values, so reruns diff bit-for-bit.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(std::span<const double> values);
  bool ok() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
};

std::string format_g17(double v);

// Reads a two-column (x, y) CSV with a header row; throws std::runtime_error
// with a line diagnostic on malformed input.
std::vector<std::array<double, 2>> read_xy_csv(const std::string& path);

}  // namespace demos
