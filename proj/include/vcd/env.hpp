#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vcd/prng.hpp"
#include "vcd/tensor.hpp"

namespace vcd::env {

enum class Action : int { Left = 0, Stay = 1, Right = 2 };

inline constexpr int kNumActions = 3;

struct MDPSpec {
  int grid_size = 16;
  int frame_stack = 2;  // stacked frames per observation
  double discount = 0.99;
  int max_episode_steps = 200;
  // Blank border around the rendered playfield wall. Keep it at least
  // augmentation pad + 1 so shifts never push lit pixels out of frame; that
  // makes shifted views exactly invertible.
  int render_margin = 5;

  int frame_size() const { return grid_size + 2 * render_margin; }
  // Objects land every grid_size-1 steps, so the per-episode score range is
  // [-max_drops, max_drops].
  int max_drops() const { return max_episode_steps / (grid_size - 1); }
  void validate() const;
};

struct FramePose {
  int paddle_x = 0;
  int object_x = 0;
  int object_y = 0;
  bool operator==(const FramePose&) const = default;
};

// Ground-truth environment state. poses[0] is the current frame, poses[1]
// one step back, and so on, frame_stack entries total. step_count does not
// affect rendering or short-horizon dynamics; it only drives the timeout.
struct TabularState {
  std::vector<FramePose> poses;
  int step_count = 0;
};

bool same_poses(const TabularState& a, const TabularState& b);
std::string pose_key(const TabularState& s);  // step_count excluded

struct Observation {
  ad::Tensor pixels;  // [frame_stack, H, W], values in {0, 0.5, 1}
};

// Pure function of the pose stack. Channel c draws poses[c]: a wall ring at
// intensity 0.5 around the playfield, one paddle pixel on the bottom
// playfield row and one object pixel above it, both at 1. The wall anchors
// absolute position; without it, translated states would emit identical
// shifted views and the view blocks would not be disjoint.
Observation render(const MDPSpec& spec, const TabularState& s);

// Inverse of render. Returns nothing when the pixels are not a valid
// rendering (wrong pixel counts or positions). The recovered state carries
// step_count = 0, which render ignores.
std::optional<TabularState> state_from_pixels(const MDPSpec& spec, const ad::Tensor& pixels);

struct StepResult {
  TabularState state;
  double reward = 0.0;
  bool done = false;
};

// True when the object will reach the paddle row on the next step.
bool object_lands(const MDPSpec& spec, const TabularState& s);

// Deterministic transition core. respawn_col is consumed only when the
// object lands this step; callers that track randomness draw it on demand,
// enumeration branches it over every column.
StepResult apply_action(const MDPSpec& spec, const TabularState& s, Action a, int respawn_col);

// Paddle centered, object at the top of the given column, history filled by
// repeating the first frame.
TabularState initial_state(const MDPSpec& spec, int object_col);

// Every pose stack reachable from any reset within `horizon` steps,
// deduplicated on poses (step_count is reported as first-visit depth).
// horizon < 0 means spec.max_episode_steps.
std::vector<TabularState> enumerate_states(const MDPSpec& spec, int horizon = -1);

// Stateful wrapper owning the PRNG stream for object spawns.
class CatcherEnv {
 public:
  explicit CatcherEnv(MDPSpec spec);

  std::pair<TabularState, Observation> reset(uint64_t seed);
  // Advances the internal state; throws if the episode already ended.
  StepResult step(Action a);

  const TabularState& state() const { return state_; }
  const MDPSpec& spec() const { return spec_; }
  bool done() const { return done_; }

 private:
  MDPSpec spec_;
  SplitMix64 rng_;
  TabularState state_;
  bool done_ = true;
};

struct StepRecord {
  int t = 0;
  TabularState state;  // state before the action
  int action = 0;
  double reward = 0.0;
  bool done = false;
};

// One JSON object per line: {t, tabular_state, action, reward, done}.
std::string trajectory_jsonl(const std::vector<StepRecord>& records);
std::vector<StepRecord> parse_trajectory_jsonl(const std::string& text);

}  // namespace vcd::env
