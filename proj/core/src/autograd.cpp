#include "diffnum/autograd.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_map>
#include <unordered_set>

#include "diffnum/ops.hpp"

namespace diffnum {

namespace {
std::atomic<std::uint64_t> g_seq{1};
}

std::uint64_t next_node_seq() { return g_seq.fetch_add(1, std::memory_order_relaxed); }

Tensor Node::output(int slot) {
  return Tensor::from_buffer(out_shapes[static_cast<size_t>(slot)],
                             out_data[static_cast<size_t>(slot)], shared_from_this(), slot);
}

Tensor make_op(const char* op, std::vector<Tensor> parents, Shape out_shape,
               std::shared_ptr<const std::vector<double>> out, BackwardFn backward) {
  auto r = make_multi_op(op, std::move(parents), {std::move(out_shape)}, {std::move(out)},
                         std::move(backward));
  return r[0];
}

std::vector<Tensor> make_multi_op(const char* op, std::vector<Tensor> parents,
                                  std::vector<Shape> out_shapes,
                                  std::vector<std::shared_ptr<const std::vector<double>>> outs,
                                  BackwardFn backward) {
  bool record = grad_mode_enabled();
  if (record) {
    record = false;
    for (const auto& p : parents)
      if (p.has_node()) {
        record = true;
        break;
      }
  }
  std::vector<Tensor> result;
  result.reserve(out_shapes.size());
  if (!record) {
    for (size_t i = 0; i < out_shapes.size(); ++i)
      result.push_back(Tensor::from_buffer(std::move(out_shapes[i]), std::move(outs[i])));
    return result;
  }
  auto node = std::make_shared<Node>();
  node->seq = next_node_seq();
  node->op = op;
  node->parents = std::move(parents);
  node->out_shapes = std::move(out_shapes);
  node->out_data = std::move(outs);
  node->backward = std::move(backward);
  for (int i = 0; i < node->num_outputs(); ++i) result.push_back(node->output(i));
  return result;
}

namespace {

// Reachable subgraph in descending creation order: the tape replay order.
std::vector<Node*> topo_order(Node* root) {
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root};
  seen.insert(root);
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      Node* pn = p.node().get();
      if (pn && seen.insert(pn).second) stack.push_back(pn);
    }
  }
  std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->seq > b->seq; });
  return order;
}

}  // namespace

std::vector<Tensor> grad(const Tensor& loss, std::span<const Tensor> wrt,
                         const GradOptions& opts) {
  if (!loss.defined() || !loss.is_scalar())
    throw ShapeError("grad: loss must be a defined scalar, shape is " +
                     (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  std::vector<Tensor> results(wrt.size());
  auto zero_fill = [&] {
    for (size_t i = 0; i < wrt.size(); ++i)
      if (!results[i].defined()) results[i] = Tensor::zeros(wrt[i].shape());
  };
  if (!loss.has_node()) {
    zero_fill();
    return results;
  }

  std::unordered_map<Node*, std::vector<Tensor>> cot;
  cot[loss.node().get()] = std::vector<Tensor>(static_cast<size_t>(loss.node()->num_outputs()));
  cot[loss.node().get()][static_cast<size_t>(loss.slot())] = Tensor::scalar(1.0);

  std::vector<Node*> order = topo_order(loss.node().get());

  // A node's backward runs only when a wrt target sits strictly below it;
  // targets themselves accumulate without being descended past. This both
  // avoids wasted work and keeps nested grad calls (a backward invoking grad
  // on a loss that references this very node) from re-entering the node.
  std::unordered_set<Node*> targets;
  for (const auto& w : wrt)
    if (w.has_node()) targets.insert(w.node().get());
  std::unordered_set<Node*> over_target;  // node is a target or has one below
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    bool hit = targets.count(n) > 0;
    for (size_t i = 0; !hit && i < n->parents.size(); ++i) {
      const auto& pn = n->parents[i].node();
      hit = pn && over_target.count(pn.get()) > 0;
    }
    if (hit) over_target.insert(n);
  }

  {
    GradModeGuard guard(opts.create_graph);
    for (Node* n : order) {
      auto it = cot.find(n);
      if (it == cot.end() || !n->backward) continue;
      bool descend = false;
      for (size_t i = 0; !descend && i < n->parents.size(); ++i) {
        const auto& pn = n->parents[i].node();
        descend = pn && over_target.count(pn.get()) > 0;
      }
      if (!descend) continue;
      std::vector<Tensor> outputs;
      outputs.reserve(static_cast<size_t>(n->num_outputs()));
      for (int s = 0; s < n->num_outputs(); ++s) outputs.push_back(n->output(s));
      std::vector<Tensor> in_cots = n->backward(outputs, it->second, n->parents);
      if (in_cots.size() != n->parents.size())
        throw ShapeError(std::string("backward of '") + n->op +
                         "' returned wrong cotangent count");
      for (size_t i = 0; i < n->parents.size(); ++i) {
        const Tensor& p = n->parents[i];
        if (!p.has_node() || !in_cots[i].defined()) continue;
        auto& slots = cot[p.node().get()];
        if (slots.empty()) slots.resize(static_cast<size_t>(p.node()->num_outputs()));
        Tensor& slot = slots[static_cast<size_t>(p.slot())];
        slot = slot.defined() ? add(slot, in_cots[i]) : in_cots[i];
      }
    }
  }

  for (size_t i = 0; i < wrt.size(); ++i) {
    const Tensor& w = wrt[i];
    if (!w.has_node()) continue;
    auto it = cot.find(w.node().get());
    if (it == cot.end()) continue;
    const Tensor& g = it->second[static_cast<size_t>(w.slot())];
    if (!g.defined()) continue;
    results[i] = opts.create_graph ? g : g.detach();
  }
  zero_fill();
  return results;
}

Tensor grad1(const Tensor& loss, const Tensor& wrt, const GradOptions& opts) {
  return grad(loss, std::span<const Tensor>(&wrt, 1), opts)[0];
}

Tensor alias(const Tensor& t) {
  if (!t.has_node()) return t.leaf();
  GradModeGuard guard(true);
  return make_op("alias", {t}, t.shape(), t.buffer(),
                 [](const std::vector<Tensor>&, const std::vector<Tensor>& cots,
                    const std::vector<Tensor>&) -> std::vector<Tensor> { return {cots[0]}; });
}

std::vector<Tensor> vjp(const TensorFn& f, std::span<const Tensor> inputs,
                        const Tensor& cotangent, const GradOptions& opts) {
  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  {
    GradModeGuard guard(true);
    for (const auto& t : inputs) leaves.push_back(t.leaf());
  }
  Tensor out;
  {
    GradModeGuard guard(true);
    out = f(leaves);
  }
  if (cotangent.shape() != out.shape())
    throw ShapeError("vjp: cotangent shape " + shape_str(cotangent.shape()) +
                     " does not match output shape " + shape_str(out.shape()));
  GradModeGuard guard(true);
  Tensor loss = sum(mul(out, cotangent));
  // Gradients w.r.t. the fresh leaves: chain rule back onto the caller's inputs
  // is the caller's business (the leaves shadow them).
  std::vector<Tensor> gs = grad(loss, leaves, opts);
  return gs;
}

}  // namespace diffnum
