#include "vcd/rl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vcd/ops.hpp"

namespace vcd::rl {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("replay capacity must be positive");
  slots_.reserve(static_cast<size_t>(std::min(capacity, 1 << 16)));
}

int ReplayBuffer::physical(int i) const {
  if (size() < capacity_) return i;
  return (write_ + i) % capacity_;
}

static std::vector<float> to_f32(const ad::Tensor& t) {
  std::vector<float> out(t.data.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(t.data[i]);
  return out;
}

void ReplayBuffer::push(const Transition& t) {
  if (t.obs.pixels.shape != t.next_obs.pixels.shape)
    throw std::invalid_argument("push: obs and next_obs shapes differ");
  if (obs_shape_.empty() && slots_.empty()) obs_shape_ = t.obs.pixels.shape;
  if (t.obs.pixels.shape != obs_shape_)
    throw std::invalid_argument("push: observation shape changed mid-buffer");

  Slot s;
  s.obs = to_f32(t.obs.pixels);
  s.next_obs = to_f32(t.next_obs.pixels);
  s.action = static_cast<int>(t.action);
  s.reward = static_cast<float>(t.reward);
  s.done = t.done;
  s.episode = episode_;
  if (t.done) ++episode_;

  if (size() < capacity_) {
    slots_.push_back(std::move(s));
  } else {
    slots_[static_cast<size_t>(write_)] = std::move(s);
    write_ = (write_ + 1) % capacity_;
  }
  ++total_pushed_;
}

Transition ReplayBuffer::restore(const Slot& s) const {
  Transition t;
  t.obs.pixels = ad::tensor(std::vector<double>(s.obs.begin(), s.obs.end()), obs_shape_);
  t.next_obs.pixels =
      ad::tensor(std::vector<double>(s.next_obs.begin(), s.next_obs.end()), obs_shape_);
  t.action = static_cast<env::Action>(s.action);
  t.reward = static_cast<double>(s.reward);
  t.done = s.done;
  return t;
}

Transition ReplayBuffer::at(int i) const {
  if (i < 0 || i >= size()) throw std::invalid_argument("at: index out of range");
  return restore(slots_[static_cast<size_t>(physical(i))]);
}

std::vector<Transition> ReplayBuffer::sample(int n, SplitMix64& rng) const {
  if (n < 0) throw std::invalid_argument("sample: negative count");
  if (size() < n) throw std::invalid_argument("sample: fewer stored transitions than requested");
  std::vector<Transition> out;
  out.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j)
    out.push_back(restore(slots_[static_cast<size_t>(physical(rng.next_below(size())))]));
  return out;
}

std::vector<std::vector<Transition>> ReplayBuffer::sample_windows(int n, int k,
                                                                  SplitMix64& rng) const {
  if (n < 0) throw std::invalid_argument("sample_windows: negative count");
  if (k < 1) throw std::invalid_argument("sample_windows: window length must be positive");
  if (size() < k)
    throw std::invalid_argument("sample_windows: fewer stored transitions than window length");

  const int starts = size() - k + 1;
  std::vector<std::vector<Transition>> out;
  out.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    int start = -1;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      int i = rng.next_below(starts);
      // pushes are sequential, so logically adjacent slots are consecutive
      // in time; matching episode ids at both ends covers the interior too
      if (slots_[static_cast<size_t>(physical(i))].episode ==
          slots_[static_cast<size_t>(physical(i + k - 1))].episode) {
        start = i;
        break;
      }
    }
    if (start < 0)
      throw std::runtime_error("sample_windows: no same-episode window of requested length");
    std::vector<Transition> w;
    w.reserve(static_cast<size_t>(k));
    for (int d = 0; d < k; ++d)
      w.push_back(restore(slots_[static_cast<size_t>(physical(start + d))]));
    out.push_back(std::move(w));
  }
  return out;
}

double epsilon_at(int64_t step, int64_t total_steps) {
  if (step < 0 || total_steps < 1) throw std::invalid_argument("epsilon_at: bad step counts");
  const double lo = 0.05;
  int64_t decay = std::max<int64_t>(1, total_steps / 5);
  if (step >= decay) return lo;
  return 1.0 + (lo - 1.0) * (static_cast<double>(step) / static_cast<double>(decay));
}

env::Action act_epsilon_greedy(const net::NetworkStack& stack, const env::Observation& obs,
                               double epsilon, SplitMix64& rng) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("act_epsilon_greedy: epsilon outside [0,1]");
  double u = rng.next_double();
  if (u < epsilon) return static_cast<env::Action>(rng.next_below(env::kNumActions));
  ad::Tensor x = net::flatten_obs(obs.pixels);
  return static_cast<env::Action>(net::greedy_actions(stack, x, false)[0]);
}

ad::Tensor td_loss(const net::NetworkStack& stack, const TdBatch& batch, double gamma) {
  const int b = batch.x.rows();
  if (b < 1) throw std::invalid_argument("td_loss: empty batch");
  if (batch.xnext.rows() != b || static_cast<int>(batch.actions.size()) != b ||
      static_cast<int>(batch.rewards.size()) != b || static_cast<int>(batch.dones.size()) != b)
    throw std::invalid_argument("td_loss: batch field lengths disagree");
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("td_loss: gamma outside [0,1)");
  for (double d : batch.dones)
    if (d != 0.0 && d != 1.0) throw std::invalid_argument("td_loss: done flags must be 0 or 1");

  ad::Tensor q_all = net::q_values(stack, batch.x, false);
  ad::Tensor q_sel = ad::reduce_sum_last(ad::multiply(q_all, net::onehot_actions(batch.actions)));

  ad::Tensor qn = net::q_values(stack, batch.xnext, true);
  std::vector<double> y(static_cast<size_t>(b));
  for (int i = 0; i < b; ++i) {
    double best = qn.at(i, 0);
    for (int a = 1; a < env::kNumActions; ++a) best = std::max(best, qn.at(i, a));
    y[static_cast<size_t>(i)] =
        batch.rewards[static_cast<size_t>(i)] +
        gamma * (1.0 - batch.dones[static_cast<size_t>(i)]) * best;
  }

  ad::Tensor diff = ad::subtract(q_sel, ad::tensor(std::move(y), {b}));
  return ad::reduce_mean(ad::multiply(diff, diff));
}

}  // namespace vcd::rl
