#include "diffnum/tensor.hpp"

#include <sstream>

#include "diffnum/autograd.hpp"

namespace diffnum {

std::int64_t numel_of(const Shape& shape) {
  std::int64_t n = 1;
  for (auto e : shape) {
    if (e < 0) throw ShapeError("negative extent in shape " + shape_str(shape));
    n *= e;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::scalar(double v) { return from_vector({}, {v}); }

Tensor Tensor::zeros(const Shape& shape) { return full(shape, 0.0); }

Tensor Tensor::ones(const Shape& shape) { return full(shape, 1.0); }

Tensor Tensor::full(const Shape& shape, double v) {
  return from_vector(shape, std::vector<double>(static_cast<size_t>(numel_of(shape)), v));
}

Tensor Tensor::from_vector(const Shape& shape, std::vector<double> values) {
  if (numel_of(shape) != static_cast<std::int64_t>(values.size()))
    throw ShapeError("from_vector: shape " + shape_str(shape) + " expects " +
                     std::to_string(numel_of(shape)) + " values, got " +
                     std::to_string(values.size()));
  return from_buffer(shape, std::make_shared<const std::vector<double>>(std::move(values)));
}

Tensor Tensor::from_buffer(Shape shape, std::shared_ptr<const std::vector<double>> data,
                           std::shared_ptr<Node> node, int slot) {
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(data);
  t.node_ = std::move(node);
  t.slot_ = slot;
  return t;
}

std::span<const double> Tensor::data() const {
  if (!data_) throw ShapeError("use of undefined Tensor");
  return {data_->data(), data_->size()};
}

double Tensor::item() const {
  if (numel() != 1)
    throw ShapeError("item() requires a one-element tensor, shape is " + shape_str(shape_));
  return (*data_)[0];
}

double Tensor::at(std::int64_t flat_index) const { return data()[static_cast<size_t>(flat_index)]; }

Tensor Tensor::detach() const { return from_buffer(shape_, data_); }

Tensor Tensor::leaf() const {
  auto node = std::make_shared<Node>();
  node->seq = next_node_seq();
  node->op = "leaf";
  node->out_shapes = {shape_};
  node->out_data = {data_};
  return from_buffer(shape_, data_, std::move(node));
}

namespace {
thread_local bool g_grad_mode = true;
}

bool grad_mode_enabled() { return g_grad_mode; }

GradModeGuard::GradModeGuard(bool enabled) : previous_(g_grad_mode) { g_grad_mode = enabled; }

GradModeGuard::~GradModeGuard() { g_grad_mode = previous_; }

}  // namespace diffnum
