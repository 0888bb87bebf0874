#include "vcd/env.hpp"

#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace vcd::env {

void MDPSpec::validate() const {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be at least 2");
  if (frame_stack < 1) throw std::invalid_argument("frame_stack must be at least 1");
  if (!(discount >= 0.0 && discount < 1.0))
    throw std::invalid_argument("discount must lie in [0,1)");
  if (max_episode_steps < 1) throw std::invalid_argument("max_episode_steps must be positive");
  if (render_margin < 1) throw std::invalid_argument("render_margin must be at least 1");
}

bool same_poses(const TabularState& a, const TabularState& b) { return a.poses == b.poses; }

std::string pose_key(const TabularState& s) {
  std::string key;
  key.reserve(s.poses.size() * 9);
  for (const auto& p : s.poses) {
    key += std::to_string(p.paddle_x);
    key += ',';
    key += std::to_string(p.object_x);
    key += ',';
    key += std::to_string(p.object_y);
    key += ';';
  }
  return key;
}

Observation render(const MDPSpec& spec, const TabularState& s) {
  const int l = spec.frame_stack;
  const int g = spec.grid_size;
  const int f = spec.frame_size();
  const int m = spec.render_margin;
  if (static_cast<int>(s.poses.size()) != l)
    throw std::invalid_argument("render: pose stack size does not match frame_stack");
  ad::Tensor px = ad::zeros({l, f, f});
  for (int c = 0; c < l; ++c) {
    const FramePose& p = s.poses[static_cast<size_t>(c)];
    double* frame = px.data.data() + static_cast<int64_t>(c) * f * f;
    // wall ring one cell outside the playfield
    for (int x = m - 1; x <= m + g; ++x) {
      frame[(m - 1) * f + x] = 0.5;
      frame[(m + g) * f + x] = 0.5;
    }
    for (int y = m - 1; y <= m + g; ++y) {
      frame[y * f + (m - 1)] = 0.5;
      frame[y * f + (m + g)] = 0.5;
    }
    frame[(m + g - 1) * f + (m + p.paddle_x)] = 1.0;
    frame[(m + p.object_y) * f + (m + p.object_x)] = 1.0;
  }
  return Observation{std::move(px)};
}

std::optional<TabularState> state_from_pixels(const MDPSpec& spec, const ad::Tensor& pixels) {
  const int l = spec.frame_stack;
  const int f = spec.frame_size();
  const int m = spec.render_margin;
  if (pixels.shape != ad::Shape{l, f, f}) return std::nullopt;
  TabularState s;
  s.poses.resize(static_cast<size_t>(l));
  for (int c = 0; c < l; ++c) {
    const double* frame = pixels.data.data() + static_cast<int64_t>(c) * f * f;
    int paddle_x = -1, object_x = -1, object_y = -1;
    for (int y = 0; y < f; ++y)
      for (int x = 0; x < f; ++x) {
        const double v = frame[y * f + x];
        if (v != 1.0) continue;
        const int gy = y - m, gx = x - m;
        if (gx < 0 || gx >= spec.grid_size || gy < 0 || gy >= spec.grid_size)
          return std::nullopt;
        if (gy == spec.grid_size - 1) {
          if (paddle_x >= 0) return std::nullopt;
          paddle_x = gx;
        } else {
          if (object_x >= 0) return std::nullopt;
          object_x = gx;
          object_y = gy;
        }
      }
    if (paddle_x < 0 || object_x < 0) return std::nullopt;
    s.poses[static_cast<size_t>(c)] = {paddle_x, object_x, object_y};
  }
  // round trip catches anything else off (wall ring, stray values)
  if (render(spec, s).pixels.data != pixels.data) return std::nullopt;
  return s;
}

bool object_lands(const MDPSpec& spec, const TabularState& s) {
  return s.poses.front().object_y + 1 == spec.grid_size - 1;
}

StepResult apply_action(const MDPSpec& spec, const TabularState& s, Action a, int respawn_col) {
  const FramePose& cur = s.poses.front();
  FramePose next = cur;
  next.paddle_x += (a == Action::Left ? -1 : a == Action::Right ? 1 : 0);
  if (next.paddle_x < 0) next.paddle_x = 0;
  if (next.paddle_x >= spec.grid_size) next.paddle_x = spec.grid_size - 1;

  double reward = 0.0;
  if (object_lands(spec, s)) {
    reward = (cur.object_x == next.paddle_x) ? 1.0 : -1.0;
    if (respawn_col < 0 || respawn_col >= spec.grid_size)
      throw std::invalid_argument("apply_action: respawn column out of range");
    next.object_x = respawn_col;
    next.object_y = 0;
  } else {
    next.object_y = cur.object_y + 1;
  }

  StepResult out;
  out.state.poses.assign(1, next);
  for (size_t i = 0; i + 1 < s.poses.size(); ++i) out.state.poses.push_back(s.poses[i]);
  out.state.step_count = s.step_count + 1;
  out.reward = reward;
  out.done = out.state.step_count >= spec.max_episode_steps;
  return out;
}

TabularState initial_state(const MDPSpec& spec, int object_col) {
  if (object_col < 0 || object_col >= spec.grid_size)
    throw std::invalid_argument("initial_state: object column out of range");
  TabularState s;
  FramePose p{spec.grid_size / 2, object_col, 0};
  s.poses.assign(static_cast<size_t>(spec.frame_stack), p);
  s.step_count = 0;
  return s;
}

std::vector<TabularState> enumerate_states(const MDPSpec& spec, int horizon) {
  spec.validate();
  if (spec.grid_size > 16)
    throw std::invalid_argument("enumerate_states: grid_size above 16 refused");
  if (horizon < 0) horizon = spec.max_episode_steps;

  std::vector<TabularState> out;
  std::unordered_set<std::string> seen;
  std::deque<TabularState> frontier;
  auto push = [&](TabularState s, int depth) {
    s.step_count = depth;
    auto [it, inserted] = seen.insert(pose_key(s));
    (void)it;
    if (!inserted) return;
    out.push_back(s);
    if (depth < horizon) frontier.push_back(std::move(s));
  };

  for (int col = 0; col < spec.grid_size; ++col) push(initial_state(spec, col), 0);

  while (!frontier.empty()) {
    TabularState s = std::move(frontier.front());
    frontier.pop_front();
    const bool lands = object_lands(spec, s);
    for (Action a : {Action::Left, Action::Stay, Action::Right}) {
      if (lands) {
        for (int col = 0; col < spec.grid_size; ++col)
          push(apply_action(spec, s, a, col).state, s.step_count + 1);
      } else {
        push(apply_action(spec, s, a, 0).state, s.step_count + 1);
      }
    }
  }
  return out;
}

CatcherEnv::CatcherEnv(MDPSpec spec) : spec_(spec) { spec_.validate(); }

std::pair<TabularState, Observation> CatcherEnv::reset(uint64_t seed) {
  rng_ = SplitMix64(seed);
  state_ = initial_state(spec_, rng_.next_below(spec_.grid_size));
  done_ = false;
  return {state_, render(spec_, state_)};
}

StepResult CatcherEnv::step(Action a) {
  if (done_) throw std::logic_error("step on a finished episode");
  // Spawn columns come off the stream only when an object actually lands,
  // so the draw sequence is a pure function of the episode's events.
  const int respawn = object_lands(spec_, state_) ? rng_.next_below(spec_.grid_size) : 0;
  StepResult r = apply_action(spec_, state_, a, respawn);
  state_ = r.state;
  done_ = r.done;
  return r;
}

namespace {

nlohmann::ordered_json state_json(const TabularState& s) {
  nlohmann::ordered_json poses = nlohmann::ordered_json::array();
  for (const auto& p : s.poses)
    poses.push_back({{"paddle_x", p.paddle_x}, {"object_x", p.object_x}, {"object_y", p.object_y}});
  return {{"poses", std::move(poses)}, {"step_count", s.step_count}};
}

TabularState state_from_json(const nlohmann::json& j) {
  TabularState s;
  for (const auto& p : j.at("poses"))
    s.poses.push_back({p.at("paddle_x").get<int>(), p.at("object_x").get<int>(),
                       p.at("object_y").get<int>()});
  s.step_count = j.at("step_count").get<int>();
  return s;
}

}  // namespace

std::string trajectory_jsonl(const std::vector<StepRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json line = {{"t", r.t},
                                   {"tabular_state", state_json(r.state)},
                                   {"action", r.action},
                                   {"reward", r.reward},
                                   {"done", r.done}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<StepRecord> parse_trajectory_jsonl(const std::string& text) {
  std::vector<StepRecord> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    if (end > pos) {
      nlohmann::json j = nlohmann::json::parse(text.substr(pos, end - pos));
      StepRecord r;
      r.t = j.at("t").get<int>();
      r.state = state_from_json(j.at("tabular_state"));
      r.action = j.at("action").get<int>();
      r.reward = j.at("reward").get<double>();
      r.done = j.at("done").get<bool>();
      out.push_back(std::move(r));
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace vcd::env
