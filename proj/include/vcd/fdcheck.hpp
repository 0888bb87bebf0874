#pragma once

#include <functional>
#include <vector>

#include "vcd/ops.hpp"

namespace vcd::ad {

// Builds a scalar loss on the given tape from the watched parameters.
using ScalarGraphFn = std::function<Tensor(Tape&, std::vector<Tensor>&)>;

// Compares reverse-mode gradients against central differences of step h.
// Returns the worst relative error max_i |analytic_i - fd_i| / max(1, |fd_i|)
// over every coordinate of every parameter. Throws if f is non-finite at
// any probe point.
double finite_diff_check(const ScalarGraphFn& f, std::vector<Tensor> params, double step = 1e-5);

}  // namespace vcd::ad
