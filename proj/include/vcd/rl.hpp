#pragma once

#include <cstdint>
#include <vector>

#include "vcd/env.hpp"
#include "vcd/networks.hpp"
#include "vcd/prng.hpp"

namespace vcd::rl {

struct Transition {
  env::Observation obs;
  env::Action action = env::Action::Stay;
  double reward = 0.0;
  env::Observation next_obs;
  bool done = false;
};

// Ring buffer over transitions. Pixels are stored as float32: renderings
// only contain {0, 0.5, 1}, all exact in single precision, so the round
// trip is lossless. Episode boundaries are tracked from the done flag so
// window sampling never straddles a reset.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity = 50000);

  void push(const Transition& t);
  int size() const { return static_cast<int>(slots_.size()); }
  int capacity() const { return capacity_; }
  int64_t total_pushed() const { return total_pushed_; }

  // The i-th oldest stored transition, reconstructed.
  Transition at(int i) const;

  // n independent uniform draws with replacement. Requires size >= n.
  std::vector<Transition> sample(int n, SplitMix64& rng) const;

  // n windows of k consecutive transitions from a single episode, uniform
  // over valid start positions via rejection sampling. The terminal
  // transition may close a window but never sits inside one. Throws when
  // the draw cap is hit, which in practice means no valid window exists.
  std::vector<std::vector<Transition>> sample_windows(int n, int k, SplitMix64& rng) const;

 private:
  struct Slot {
    std::vector<float> obs;
    std::vector<float> next_obs;
    int action = 0;
    float reward = 0.0f;
    bool done = false;
    int64_t episode = 0;
  };

  int physical(int i) const;
  Transition restore(const Slot& s) const;

  int capacity_ = 0;
  std::vector<Slot> slots_;
  ad::Shape obs_shape_;
  int write_ = 0;  // once full, also the oldest slot
  int64_t total_pushed_ = 0;
  int64_t episode_ = 0;
};

// Exploration schedule: linear 1.0 -> 0.05 across the first fifth of the
// step budget, flat afterwards.
double epsilon_at(int64_t step, int64_t total_steps);

// Draws u first and the uniform action only on the explore branch, so the
// greedy path consumes exactly one draw. Greedy acting reads the online
// Q-head on the raw observation; ties go to the lowest action index.
env::Action act_epsilon_greedy(const net::NetworkStack& stack, const env::Observation& obs,
                               double epsilon, SplitMix64& rng);

// One TD batch over flattened views [B, D]. x carries the same augmented
// views the auxiliary losses consume; xnext feeds the bootstrap target.
struct TdBatch {
  ad::Tensor x;
  ad::Tensor xnext;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> dones;  // 0 or 1
};

// Mean squared one-step TD error. The bootstrap y = r + gamma (1 - done)
// max_a Q_target(x', a) is computed as a plain value, so no gradient can
// reach either network line through the target.
ad::Tensor td_loss(const net::NetworkStack& stack, const TdBatch& batch, double gamma);

}  // namespace vcd::rl
