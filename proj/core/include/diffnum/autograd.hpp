#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "diffnum/tensor.hpp"

namespace diffnum {

/// Backward rule of a recorded operation. Receives the node's outputs
/// (graph-carrying), one cotangent per output (undefined Tensor = zero), and the
/// recorded parent tensors. Returns one cotangent per parent (undefined = none).
/// Rules are written in terms of Tensor ops, so running them with recording
/// enabled re-tapes the backward pass and makes gradients differentiable.
using BackwardFn = std::function<std::vector<Tensor>(
    const std::vector<Tensor>& outputs, const std::vector<Tensor>& cotangents,
    const std::vector<Tensor>& parents)>;

/// One recorded operation. Nodes carry a process-unique, monotonically
/// increasing sequence id; sorting reachable nodes by id yields the tape order
/// used for the backward sweep.
struct Node : std::enable_shared_from_this<Node> {
  std::uint64_t seq = 0;
  const char* op = "";
  std::vector<Tensor> parents;
  std::vector<Shape> out_shapes;
  std::vector<std::shared_ptr<const std::vector<double>>> out_data;
  BackwardFn backward;  // null for leaves

  int num_outputs() const { return static_cast<int>(out_shapes.size()); }
  Tensor output(int slot = 0);
};

std::uint64_t next_node_seq();

/// Records a single-output op (the common case). Returns a plain tensor when
/// recording is off or no parent carries a node.
Tensor make_op(const char* op, std::vector<Tensor> parents, Shape out_shape,
               std::shared_ptr<const std::vector<double>> out, BackwardFn backward);

/// Records a multi-output op under the same conditions as make_op.
std::vector<Tensor> make_multi_op(const char* op, std::vector<Tensor> parents,
                                  std::vector<Shape> out_shapes,
                                  std::vector<std::shared_ptr<const std::vector<double>>> outs,
                                  BackwardFn backward);

struct GradOptions {
  bool create_graph = false;
};

/// Reverse-mode gradient of a scalar loss with respect to each tensor in `wrt`.
/// A `wrt` tensor not connected to the loss gets a zero tensor of its shape.
/// With create_graph the results carry nodes and can be differentiated again.
std::vector<Tensor> grad(const Tensor& loss, std::span<const Tensor> wrt,
                         const GradOptions& opts = {});

Tensor grad1(const Tensor& loss, const Tensor& wrt, const GradOptions& opts = {});

/// Rebinds t as a standalone differentiation target: a fresh leaf for plain
/// tensors, an identity-backward alias node for graph-carrying ones. grad on
/// the alias measures only the dependence of expressions built from it (the
/// sweep stops there instead of descending into t's own history), while the
/// alias edge keeps those expressions differentiable back to t. This is the
/// partial-derivative device used by the implicit-function VJPs.
Tensor alias(const Tensor& t);

/// A function of tensors: the canonical callable accepted by the functionals.
/// Convention: primary inputs first, then parameter tensors.
using TensorFn = std::function<Tensor(std::span<const Tensor>)>;

/// Cotangent-vector product of f at `inputs`: returns cotangent^T (df/dinput_i)
/// reshaped to each input's shape.
std::vector<Tensor> vjp(const TensorFn& f, std::span<const Tensor> inputs,
                        const Tensor& cotangent, const GradOptions& opts = {});

}  // namespace diffnum
