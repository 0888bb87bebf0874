#pragma once

#include <string>
#include <vector>

#include "vcd/env.hpp"
#include "vcd/ops.hpp"
#include "vcd/prng.hpp"

namespace vcd::net {

struct NetworkConfig {
  std::vector<int> encoder_widths = {256, 128};
  int z_dim = 64;
  std::vector<int> dynamics_widths = {128};
  std::vector<int> projector_widths = {64};
  int proj_dim = 32;
  std::vector<int> predictor_widths = {32};
  int num_predictors = 2;  // 0: identity, 1: shared, 2: separate pre/con
  std::vector<int> q_head_widths = {64};

  // layer dims per role, [in, hidden..., out]
  std::vector<int> encoder_dims(int input_dim) const;
  std::vector<int> dynamics_dims() const;
  std::vector<int> projector_dims() const;
  std::vector<int> predictor_dims() const;
  std::vector<int> q_dims() const;
  void validate() const;
};

// Online holds every trainable role; the target line mirrors encoder,
// dynamics, projector and the Q-head. Predictors exist only online.
struct NetworkStack {
  NetworkConfig cfg;
  int input_dim = 0;
  ad::ParamMap online;
  ad::ParamMap target;
};

// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] draws in a fixed role and layer
// order; the target starts as an exact copy of the shared roles.
NetworkStack init_stack(const NetworkConfig& cfg, int input_dim, SplitMix64& rng);

// x [B, in] -> [B, out]; relu on hidden layers, linear output. Reads
// "<role>/w<i>" and "<role>/b<i>".
ad::Tensor mlp_forward(const ad::ParamMap& params, const std::string& role,
                       const ad::Tensor& x);

ad::Tensor onehot_actions(const std::vector<int>& actions);

// One latent dynamics step: h(z, onehot(a)).
ad::Tensor dynamics_step(const ad::ParamMap& params, const ad::Tensor& z,
                         const std::vector<int>& actions);

// K chained dynamics steps; element k is the prediction k+1 steps ahead.
std::vector<ad::Tensor> rollout_k(const ad::ParamMap& params, const ad::Tensor& z,
                                  const std::vector<std::vector<int>>& actions);

// Predictor for the prediction ("pre") or consistency ("con") branch;
// identity when num_predictors is 0, shared when 1.
ad::Tensor predictor_forward(const NetworkStack& stack, const std::string& branch,
                             const ad::Tensor& y);

struct LatentPipeline {
  ad::Tensor z1;     // online view representation
  ad::Tensor zbar2;  // target view representation
  ad::Tensor xhat1;  // online dynamics prediction
  ad::Tensor xbar2;  // target dynamics prediction
  ad::Tensor yhat1;  // online projection of xhat1
  ad::Tensor ybar2;  // target projection of xbar2
  ad::Tensor ytilde; // target projection of the encoded true next view
};

// Single-step pipeline over batched flat views [B, D]. Every target-line
// output is detached; no gradient reaches target parameters even when they
// are watched.
LatentPipeline forward_pipeline(const NetworkStack& stack, const ad::Tensor& x1,
                                const ad::Tensor& x2, const std::vector<int>& actions,
                                const ad::Tensor& xnext);

// theta_m <- (1 - tau) theta_m + tau theta_o on encoder/dynamics/projector.
void ema_update(NetworkStack& stack, double tau);
// Hard copies, used for tau = 0 periodic syncing and for the DQN target.
void sync_ssl_target(NetworkStack& stack);
void sync_q_target(NetworkStack& stack);

// q_head(f(x)) for the chosen line, [B, D] -> [B, 3].
ad::Tensor q_values(const NetworkStack& stack, const ad::Tensor& x, bool use_target);

// argmax over Q with ties broken toward the lowest action index
std::vector<int> greedy_actions(const NetworkStack& stack, const ad::Tensor& x,
                                bool use_target);

// Flattens [l,H,W] pixels into the [1, D] network input layout.
ad::Tensor flatten_obs(const ad::Tensor& pixels);

std::string checkpoint_json(const NetworkStack& stack);
NetworkStack parse_checkpoint_json(const std::string& text);
void save_checkpoint(const NetworkStack& stack, const std::string& path);
NetworkStack load_checkpoint(const std::string& path);

}  // namespace vcd::net
