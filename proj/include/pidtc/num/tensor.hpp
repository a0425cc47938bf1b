#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pidtc/errors.hpp"

namespace pidtc::num {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  out += ")";
  return out;
}

inline std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

// One define-by-run operation record. `backward` reads this node's grad and
// accumulates into the parents' grads.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (requires_grad && grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

// Shared handle to a Node; copying a Tensor aliases the underlying storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->value.assign(shape_size(shape), 0.0);
    n->shape = std::move(shape);
    n->requires_grad = requires_grad;
    n->ensure_grad();
    return Tensor(std::move(n));
  }

  static Tensor constant(Shape shape, std::vector<double> values) {
    return make(std::move(shape), std::move(values), false);
  }

  static Tensor param(Shape shape, std::vector<double> values) {
    return make(std::move(shape), std::move(values), true);
  }

  static Tensor scalar(double v, bool requires_grad = false) {
    return make({1}, {v}, requires_grad);
  }

  static Tensor from_node(std::shared_ptr<Node> n) { return Tensor(std::move(n)); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return check()->shape; }
  std::size_t size() const { return check()->value.size(); }
  std::size_t rank() const { return check()->shape.size(); }

  std::size_t rows() const {
    require_matrix("rows");
    return node_->shape[0];
  }

  std::size_t cols() const {
    require_matrix("cols");
    return node_->shape[1];
  }

  bool requires_grad() const { return check()->requires_grad; }

  std::vector<double>& values() { return check()->value; }
  const std::vector<double>& values() const { return check()->value; }

  std::vector<double>& grad() {
    check()->ensure_grad();
    return node_->grad;
  }
  const std::vector<double>& grad() const {
    check()->ensure_grad();
    return node_->grad;
  }

  double item() const {
    if (size() != 1) throw ContractError("item: tensor has " + std::to_string(size()) + " elements");
    return node_->value[0];
  }

  double at(std::size_t r, std::size_t c) const {
    require_matrix("at");
    return node_->value[r * node_->shape[1] + c];
  }

  void set(std::size_t r, std::size_t c, double v) {
    require_matrix("set");
    node_->value[r * node_->shape[1] + c] = v;
  }

  void zero_grad() {
    if (check()->requires_grad) node_->grad.assign(node_->value.size(), 0.0);
  }

  std::shared_ptr<Node> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Tensor make(Shape shape, std::vector<double> values, bool requires_grad) {
    if (shape_size(shape) != values.size()) {
      throw DimensionError("tensor: shape " + shape_str(shape) + " does not hold " +
                           std::to_string(values.size()) + " values");
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    n->ensure_grad();
    return Tensor(std::move(n));
  }

  const std::shared_ptr<Node>& check() const {
    if (!node_) throw ContractError("tensor: used before initialization");
    return node_;
  }

  void require_matrix(const char* what) const {
    if (check()->shape.size() != 2) {
      throw DimensionError(std::string(what) + ": expected a 2-D tensor, got " +
                           shape_str(node_->shape));
    }
  }

  std::shared_ptr<Node> node_;
};

// Topologically ordered view of every node reachable from a root. Backward
// seeds d(root) = 1 and visits each node exactly once, children before
// parents; leaves that do not participate keep zero grads.
class GradGraph {
 public:
  explicit GradGraph(const Tensor& root) : root_(root.node()) {
    if (!root_) throw ContractError("grad graph: undefined root");
    std::unordered_set<const Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root_.get(), 0);
    seen.insert(root_.get());
    while (!stack.empty()) {
      auto& [node, next_parent] = stack.back();
      if (next_parent < node->parents.size()) {
        Node* parent = node->parents[next_parent].get();
        ++next_parent;
        if (parent->requires_grad && seen.insert(parent).second) {
          stack.emplace_back(parent, 0);
        }
      } else {
        order_.push_back(node);  // post-order: parents precede children
        stack.pop_back();
      }
    }
  }

  std::size_t node_count() const { return order_.size(); }

  void backward() {
    if (root_->value.size() != 1) {
      throw ContractError("backward: root must be a scalar, got " + shape_str(root_->shape));
    }
    if (!root_->requires_grad) return;
    for (Node* n : order_) n->ensure_grad();
    root_->grad[0] += 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      Node* n = *it;
      if (n->backward) n->backward(*n);
    }
  }

 private:
  std::vector<Node*> order_;
  std::shared_ptr<Node> root_;
};

inline void backward(const Tensor& loss) { GradGraph(loss).backward(); }

}  // namespace pidtc::num
