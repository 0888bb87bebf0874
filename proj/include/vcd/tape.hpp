#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vcd/tensor.hpp"

namespace vcd::ad {

class Tape;

// Per-node gradient accumulators produced by Tape::backward.
class Gradients {
 public:
  // Gradient of the backward root w.r.t. a watched tensor. Tensors that
  // received no gradient flow (e.g. behind stop_gradient) yield zeros.
  const std::vector<double>& at(const Tensor& t);
  Tensor tensor_at(const Tensor& t);
  bool nonzero(const Tensor& t);

 private:
  friend class Tape;
  const Tape* tape_ = nullptr;
  std::vector<std::vector<double>> by_node_;
};

// Adds `g` into the accumulator slot for `node`, sizing it on first touch.
using VjpFn = std::function<void(const std::vector<double>& gout,
                                 std::vector<std::vector<double>>& acc)>;

// Append-only record of forward operations. Node ids are assigned in
// execution order, so walking ids in reverse is a valid reverse
// topological order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers a leaf so backward can report its gradient.
  void watch(Tensor& t);

  int record(int64_t out_size, VjpFn vjp);

  // Gradient of a scalar root w.r.t. every watched leaf.
  Gradients backward(const Tensor& root) const;

  size_t size() const { return nodes_.size(); }
  int64_t node_size(int node) const { return nodes_[static_cast<size_t>(node)].out_size; }

  static std::vector<double>& slot(std::vector<std::vector<double>>& acc, int node,
                                   int64_t size);

 private:
  struct Node {
    VjpFn vjp;  // null for leaves
    int64_t out_size = 0;
  };
  std::vector<Node> nodes_;
};

// Watch every tensor of a parameter map / strip any tape association.
void watch_all(Tape& tape, ParamMap& params);
void detach_all(ParamMap& params);

// When enabled, every forward op verifies its output is free of NaN/Inf and
// throws a diagnostic error otherwise. Off by default; tests and the trainer
// turn it on.
void set_finite_checks(bool on);
bool finite_checks();

}  // namespace vcd::ad
