// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sv2v/tensor.hpp"

namespace sv2v {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// Propagates the gradient of a node's output into its parents.
using BackwardFn = std::function<void(const Tensor& out_grad, const std::vector<NodePtr>& parents)>;

struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows in
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  BackwardFn backward;

  /// Adds `g` into this node's gradient, allocating on first use.
  void accumulate(const Tensor& g);
};

/// Handle to a node of the reverse-mode graph. Cheap to copy.
///
/// A Var whose parents all have requires_grad == false records no parents and
/// no backward closure, so inference through constant weights builds no graph.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  static Var make(Tensor value, std::vector<Var> parents, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  /// Mutable access for optimizers and checkpoint loading. Never call on an
  /// intermediate whose graph is still going to be differentiated.
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool r) { node_->requires_grad = r; }
  void zero_grad() { node_->grad = Tensor(); }
  const Shape& shape() const { return node_->value.shape(); }
  int dim(int i) const { return node_->value.dim(i); }

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

inline bool needs_grad(const std::vector<NodePtr>& parents, std::size_t i) {
  return parents[i]->requires_grad;
}

Var constant(Tensor value);
Var parameter(Tensor value);
/// Same value, cut from the graph.
Var detach(const Var& v);

/// Backpropagates from a scalar (single-element) Var; seeds d(root)/d(root) = 1.
void backward(const Var& root);

struct NamedParam {
  std::string name;
  Var var;
};

/// Zeroes the gradient of every parameter.
void zero_grads(const std::vector<NamedParam>& params);

}  // namespace sv2v
