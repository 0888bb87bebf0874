#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vcd/env.hpp"
#include "vcd/losses.hpp"
#include "vcd/metrics.hpp"
#include "vcd/networks.hpp"
#include "vcd/rl.hpp"

namespace vcd::train {

struct TrainConfig {
  int64_t total_env_steps = 50000;
  uint64_t seed = 0;
  loss::LossConfig loss;
  double ema_tau = 0.05;
  int target_sync_interval = 1000;  // learner steps between Q-target copies
  int eval_every = 2000;
  int eval_episodes = 10;
  net::NetworkConfig network;
  env::MDPSpec env;
  int batch_size = 64;
  int warmup_steps = 1000;  // env steps collected before updates begin
  double learning_rate = 3e-4;
  int replay_capacity = 50000;
  int aug_pad = 4;
  // Bootstrap the Q-target from the raw next observation instead of the
  // augmented view shared with the auxiliary losses.
  bool clean_target_views = false;

  int input_dim() const { return env.frame_stack * env.frame_size() * env.frame_size(); }
  void validate() const;
};

// Substream ids off the master seed. Each consumer of randomness owns one,
// so no consumer can shift another's draws.
inline constexpr uint64_t kStreamEnv = 0;
inline constexpr uint64_t kStreamAugment = 1;
inline constexpr uint64_t kStreamInit = 2;
inline constexpr uint64_t kStreamReplay = 3;
inline constexpr uint64_t kStreamAct = 4;
inline constexpr uint64_t kStreamEvalBase = 1000;  // + eval ordinal

struct TrainHooks {
  // One serialized jsonl object per call.
  std::function<void(const std::string&)> log_line;
  // Fired at every evaluation point and once at the end of training.
  std::function<void(const net::NetworkStack&, int64_t step, bool final)> on_checkpoint;
};

struct TrainResult {
  net::NetworkStack stack;
  double final_eval = 0.0;
  bool evaluated = false;  // false only for zero-step runs
  int64_t episodes = 0;
  int64_t updates = 0;
};

// The full loop: act epsilon-greedy, store, sample windows, draw two views
// of the present and one of each successor, minimize the combined loss on
// the online line, EMA the target line, periodically hard-sync the
// Q-target and evaluate greedily. Deterministic given (config, seed).
TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {});

// Mean return of the greedy policy over fresh episodes on clean
// observations; no exploration, no augmentation.
double evaluate(const net::NetworkStack& stack, const env::MDPSpec& spec, int episodes,
                uint64_t seed);

// Mean return of the uniform-random policy, the floor any learner should
// clear.
double random_policy_return(const env::MDPSpec& spec, int episodes, uint64_t seed);

struct AblationSpec {
  std::string axis;  // lambda | k_steps | mode | predictors | tau
  std::vector<std::string> values;
  std::vector<uint64_t> seeds;
  std::string tag;  // optional row-label prefix, e.g. "lam0"
};

// Base config with one axis value applied; throws on unknown axis or a
// value that does not parse for it.
TrainConfig apply_axis_value(const TrainConfig& base, const std::string& axis,
                             const std::string& value);

// Canonical row label, "<tag>:<axis>=<value>" or "<axis>=<value>".
std::string axis_label(const std::string& axis, const std::string& value,
                       const std::string& tag);

// Runs one configuration/seed pair and returns its final score.
using RunFn = std::function<double(const TrainConfig& cfg, const std::string& label,
                                   uint64_t seed)>;

// Cross product of values and seeds. Every configuration is validated
// before any run starts; rows are ordered by value, runs by seed. jobs > 1
// executes runs on a thread pool with identical results.
metrics::ScoreMatrix ablation_suite(const TrainConfig& base, const AblationSpec& spec,
                                    const RunFn& run, int jobs = 1);

// Default runner: train without hooks, score = final evaluation.
double run_for_score(const TrainConfig& cfg, uint64_t seed);

}  // namespace vcd::train
