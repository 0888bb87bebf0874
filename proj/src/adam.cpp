#include "vcd/adam.hpp"

#include <cmath>

namespace vcd::ad {

void adam_step(ParamMap& params, Gradients& grads, AdamState& state, double lr) {
  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (auto& [name, p] : params) {
    const std::vector<double>& g = grads.at(p);
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) m.assign(p.data.size(), 0.0);
    if (v.empty()) v.assign(p.data.size(), 0.0);
    for (size_t i = 0; i < p.data.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / bias1;
      const double vhat = v[i] / bias2;
      p.data[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace vcd::ad
