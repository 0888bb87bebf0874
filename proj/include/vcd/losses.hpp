#pragma once

#include <string>
#include <vector>

#include "vcd/networks.hpp"
#include "vcd/ops.hpp"

namespace vcd::loss {

enum class Mode { Vcd, VcdPne, VcdCne, Base, Contrastive };

Mode mode_from_string(const std::string& s);
std::string mode_to_string(Mode m);

struct LossConfig {
  double lambda = 0.5;
  int pred_steps = 1;  // K
  Mode mode = Mode::Vcd;
  double infonce_temperature = 0.1;
  // Averages a second pass with the view roles swapped. Off by default; the
  // asymmetric form is the written one.
  bool symmetrized = false;

  double effective_lambda() const { return mode == Mode::Base ? 0.0 : lambda; }
  void validate() const;
};

// One training batch for the auxiliary task: two views of the state at t,
// the action sequence a_t .. a_{t+K-1}, and one view of each true successor
// v_{t+1} .. v_{t+K}.
struct AuxBatch {
  ad::Tensor x1;
  ad::Tensor x2;
  std::vector<std::vector<int>> actions;
  std::vector<ad::Tensor> xnext;
};

// Mean over rows of 2 - 2 cos(prediction_i, target_i).
ad::Tensor cosine_distance_loss(const ad::Tensor& prediction, const ad::Tensor& target);

// Single-step losses on a computed pipeline.
ad::Tensor prediction_loss(const net::LatentPipeline& pipe, const net::NetworkStack& stack);
ad::Tensor consistency_loss(const net::LatentPipeline& pipe, const net::NetworkStack& stack);

// Mean over rows of -log softmax similarity, positives on the diagonal.
// Keys are treated as constants (they are target-line outputs here); only
// queries receive gradient.
ad::Tensor infonce_loss(const ad::Tensor& queries, const ad::Tensor& keys, double temperature);

// The two auxiliary scalars for a batch under the configured mode: K-step
// averaged, gradient-scoped for the PNE/CNE variants. In contrastive mode
// l_pre holds the InfoNCE loss and l_con is a constant zero.
struct AuxLossResult {
  ad::Tensor l_pre;
  ad::Tensor l_con;
};
AuxLossResult aux_losses(const net::NetworkStack& stack, const LossConfig& cfg,
                         const AuxBatch& batch);

struct LossReport {
  double l_rl = 0.0;
  double l_pre = 0.0;
  double l_con = 0.0;
  double l_total = 0.0;
};

// l_rl + l_pre + lambda * l_con (contrastive: l_rl + l_pre). Throws on a
// non-finite component, naming it.
struct TotalLoss {
  ad::Tensor total;
  LossReport report;
};
TotalLoss total_loss(const ad::Tensor& l_rl, const AuxLossResult& aux, const LossConfig& cfg);

// Which parameter groups receive nonzero gradient from each auxiliary term,
// with the lambda weight applied to the consistency term exactly as it
// enters the total.
struct GradScopeReport {
  bool pre_encoder = false;
  bool pre_dynamics = false;
  bool con_encoder = false;
  bool con_dynamics = false;
};
GradScopeReport inspect_term_gradients(const net::NetworkStack& stack, const LossConfig& cfg,
                                       const AuxBatch& batch);

}  // namespace vcd::loss
