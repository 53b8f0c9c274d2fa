#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scidraft/numerics/tensor.hpp"

namespace scidraft::numerics {

// A learnable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Shape shape) : name(std::move(n)), value(shape), grad(std::move(shape)) {}

  void zero_grad() {
    if (grad.shape() != value.shape()) grad = Tensor(value.shape());
    grad.fill(0.0);
  }
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// tape that produced it is alive.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t index() const noexcept { return index_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  double item() const { return value().item(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

// Reverse-mode computation record. Nodes are appended in forward order and
// backward() visits them in exact reverse, accumulating gradients additively.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);

  // Leaf whose gradient flows into p.grad. Repeated calls return the same node.
  Var param(Parameter& p);
  // Read-only leaf referencing p.value (no gradient, no copy).
  Var param(const Parameter& p);

  // Records an op result. parents are the node indices the backward closure
  // may write gradients to; the node requires grad iff any parent does.
  Var record(Tensor value, std::initializer_list<Var> parents, Backward backward);
  Var record(Tensor value, std::span<const Var> parents, Backward backward);

  const Tensor& value(std::size_t node) const;
  bool requires_grad(std::size_t node) const { return nodes_[node].requires_grad; }

  // Gradient buffer of a node, zero-initialised on first access.
  Tensor& grad(std::size_t node);

  // Returns the gradient buffer of node if it requires grad, else nullptr.
  Tensor* grad_if_required(std::size_t node) {
    return nodes_[node].requires_grad ? &grad(node) : nullptr;
  }

  // Back-propagates from a scalar root into every parameter reached.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Parameter* param = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> trainable_;
  std::unordered_map<const Parameter*, std::size_t> frozen_;
};

// Zeroes the gradients of params, back-propagates from root and returns a copy
// of each parameter gradient (exact zero for parameters off the path).
std::vector<Tensor> gradients(Var root, std::span<Parameter* const> params);

}  // namespace scidraft::numerics
