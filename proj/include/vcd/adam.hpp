#pragma once

#include <map>
#include <string>
#include <vector>

#include "vcd/tape.hpp"
#include "vcd/tensor.hpp"

namespace vcd::ad {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step = 0;  // number of updates applied so far
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
};

// One Adam update over every watched parameter in `params`, in place.
// Parameters with no recorded gradient see grad = 0 (their moments still decay).
void adam_step(ParamMap& params, Gradients& grads, AdamState& state, double lr);

}  // namespace vcd::ad
