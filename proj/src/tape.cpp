#include "vcd/tape.hpp"

#include <atomic>
#include <stdexcept>

namespace vcd::ad {

namespace {
std::atomic<bool> g_finite_checks{false};
}

void set_finite_checks(bool on) { g_finite_checks.store(on, std::memory_order_relaxed); }
bool finite_checks() { return g_finite_checks.load(std::memory_order_relaxed); }

void Tape::watch(Tensor& t) {
  t.tape = this;
  t.node = record(t.numel(), nullptr);
}

int Tape::record(int64_t out_size, VjpFn vjp) {
  nodes_.push_back(Node{std::move(vjp), out_size});
  return static_cast<int>(nodes_.size()) - 1;
}

std::vector<double>& Tape::slot(std::vector<std::vector<double>>& acc, int node, int64_t size) {
  auto& v = acc[static_cast<size_t>(node)];
  if (v.empty()) v.assign(static_cast<size_t>(size), 0.0);
  return v;
}

Gradients Tape::backward(const Tensor& root) const {
  if (root.tape != this || root.node < 0)
    throw std::invalid_argument("backward: root is not recorded on this tape");
  if (!root.is_scalar())
    throw std::invalid_argument("backward: root of shape " + shape_str(root.shape) +
                                " is not a scalar");

  Gradients g;
  g.tape_ = this;
  g.by_node_.assign(nodes_.size(), {});
  g.by_node_[static_cast<size_t>(root.node)] = {1.0};

  for (int id = root.node; id >= 0; --id) {
    const auto& node = nodes_[static_cast<size_t>(id)];
    const auto& gout = g.by_node_[static_cast<size_t>(id)];
    if (gout.empty() || !node.vjp) continue;
    node.vjp(gout, g.by_node_);
  }
  return g;
}

const std::vector<double>& Gradients::at(const Tensor& t) {
  if (t.tape != tape_ || t.node < 0)
    throw std::invalid_argument("Gradients::at: tensor is not watched on this tape");
  auto& v = by_node_[static_cast<size_t>(t.node)];
  if (v.empty()) v.assign(t.data.size(), 0.0);
  return v;
}

Tensor Gradients::tensor_at(const Tensor& t) {
  Tensor out;
  out.shape = t.shape;
  out.data = at(t);
  return out;
}

bool Gradients::nonzero(const Tensor& t) {
  for (double v : at(t))
    if (v != 0.0) return true;
  return false;
}

void watch_all(Tape& tape, ParamMap& params) {
  for (auto& [name, t] : params) {
    (void)name;
    tape.watch(t);
  }
}

void detach_all(ParamMap& params) {
  for (auto& [name, t] : params) {
    (void)name;
    t.tape = nullptr;
    t.node = -1;
  }
}

}  // namespace vcd::ad
