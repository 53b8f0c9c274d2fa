#include "scidraft/numerics/tape.hpp"

#include <stdexcept>

namespace scidraft::numerics {

const Tensor& Var::value() const { return tape_->value(index_); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
  if (auto it = trainable_.find(&p); it != trainable_.end()) return Var(this, it->second);
  if (p.grad.shape() != p.value.shape()) p.zero_grad();
  Node node;
  node.external = &p.value;
  node.param = &p;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  trainable_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(const Parameter& p) {
  if (auto it = frozen_.find(&p); it != frozen_.end()) return Var(this, it->second);
  Node node;
  node.external = &p.value;
  nodes_.push_back(std::move(node));
  frozen_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, Backward backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> parents, Backward backward) {
  Node node;
  node.value = std::move(value);
  for (const Var& p : parents) {
    if (&p.tape() != this) throw std::invalid_argument("operands recorded on different tapes");
    node.requires_grad = node.requires_grad || nodes_[p.index()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t node) const {
  const Node& n = nodes_[node];
  return n.external ? *n.external : n.value;
}

Tensor& Tape::grad(std::size_t node) {
  Node& n = nodes_[node];
  if (n.param) return n.param->grad;
  if (n.grad.size() != value(node).size()) n.grad = Tensor(value(node).shape());
  return n.grad;
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw std::invalid_argument("backward root belongs to another tape");
  if (root.size() != 1) {
    throw std::invalid_argument("backward requires a scalar root, got shape " +
                                shape_to_string(root.shape()));
  }
  if (!nodes_[root.index()].requires_grad) return;
  grad(root.index())[0] += 1.0;
  for (std::size_t i = root.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, i);
  }
}

std::vector<Tensor> gradients(Var root, std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
  root.tape().backward(root);
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(p->grad);
  return out;
}

}  // namespace scidraft::numerics
