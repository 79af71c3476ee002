#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "diffnum/errors.hpp"

namespace diffnum {

using Shape = std::vector<std::int64_t>;

std::int64_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node;

/// Dense row-major double tensor. A Tensor is a value-semantic handle to an
/// immutable buffer; when it carries a graph node it participates in reverse-mode
/// differentiation, otherwise it acts as a constant.
class Tensor {
 public:
  Tensor() = default;

  static Tensor scalar(double v);
  static Tensor zeros(const Shape& shape);
  static Tensor ones(const Shape& shape);
  static Tensor full(const Shape& shape, double v);
  static Tensor from_vector(const Shape& shape, std::vector<double> values);
  static Tensor from_buffer(Shape shape, std::shared_ptr<const std::vector<double>> data,
                            std::shared_ptr<Node> node = nullptr, int slot = 0);

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const { return shape_; }
  std::int64_t rank() const { return static_cast<std::int64_t>(shape_.size()); }
  std::int64_t numel() const { return data_ ? static_cast<std::int64_t>(data_->size()) : 0; }
  std::int64_t extent(std::int64_t axis) const { return shape_.at(static_cast<size_t>(axis)); }
  bool is_scalar() const { return shape_.empty(); }

  std::span<const double> data() const;
  const std::shared_ptr<const std::vector<double>>& buffer() const { return data_; }
  double item() const;
  double at(std::int64_t flat_index) const;

  const std::shared_ptr<Node>& node() const { return node_; }
  int slot() const { return slot_; }
  bool has_node() const { return node_ != nullptr; }

  /// Same buffer, no graph node: acts as a constant from here on.
  Tensor detach() const;

  /// Same buffer, fresh leaf node: marks this value as a differentiation target.
  Tensor leaf() const;

 private:
  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  std::shared_ptr<Node> node_;
  int slot_ = 0;
};

/// Thread-local switch controlling whether ops record graph nodes.
bool grad_mode_enabled();

class GradModeGuard {
 public:
  explicit GradModeGuard(bool enabled);
  ~GradModeGuard();
  GradModeGuard(const GradModeGuard&) = delete;
  GradModeGuard& operator=(const GradModeGuard&) = delete;

 private:
  bool previous_;
};

/// Convenience RAII for disabling recording (solver loops, numeric probes).
struct NoGradGuard : GradModeGuard {
  NoGradGuard() : GradModeGuard(false) {}
};

}  // namespace diffnum
