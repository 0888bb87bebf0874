#include <map>

#include "doctest.h"
#include "vcd/augment.hpp"

using namespace vcd;
using namespace vcd::aug;

namespace {

env::MDPSpec tiny_spec(int grid) {
  env::MDPSpec s;
  s.grid_size = grid;
  s.frame_stack = 2;
  s.render_margin = 3;
  s.max_episode_steps = 50;
  return s;
}

}  // namespace

TEST_CASE("zero shift is the identity") {
  env::MDPSpec spec = tiny_spec(6);
  env::Observation obs = env::render(spec, env::initial_state(spec, 2));
  View v = render_view(obs, {0, 0, 4});
  CHECK(v.pixels.data == obs.pixels.data);
}

TEST_CASE("shift then decode restores the source exactly") {
  env::MDPSpec spec = tiny_spec(6);
  env::Observation obs = env::render(spec, env::initial_state(spec, 4));
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx) {
      View v = render_view(obs, {dx, dy, 2});
      CHECK(decode_view(v).pixels.data == obs.pixels.data);
    }
}

TEST_CASE("shift content moves the expected direction") {
  env::MDPSpec spec;
  spec.grid_size = 2;
  spec.frame_stack = 1;
  spec.render_margin = 2;
  env::TabularState s;
  s.poses = {{0, 1, 0}};
  env::Observation obs = env::render(spec, s);
  const int f = spec.frame_size();
  View v = render_view(obs, {1, 0, 2});  // right by one
  // paddle pixel was at (m+1, m+0) = (3,2); now column 3
  CHECK(obs.pixels.data[3 * f + 2] == 1.0);
  CHECK(v.pixels.data[3 * f + 3] == 1.0);
  CHECK(v.pixels.data[3 * f + 2] == 0.5);  // left wall slid onto this cell
  CHECK(v.pixels.data[3 * f + 0] == 0.0);  // vacated frame edge
}

TEST_CASE("shifts beyond pad are refused") {
  env::MDPSpec spec = tiny_spec(6);
  env::Observation obs = env::render(spec, env::initial_state(spec, 1));
  CHECK_THROWS(render_view(obs, {3, 0, 2}));
  CHECK_THROWS(render_view(obs, {0, -5, 4}));
}

TEST_CASE("sample_view is deterministic and respects pad") {
  env::MDPSpec spec = tiny_spec(6);
  env::Observation obs = env::render(spec, env::initial_state(spec, 3));
  SplitMix64 a(13), b(13);
  View va = sample_view(obs, a, 2);
  View vb = sample_view(obs, b, 2);
  CHECK(va.params.dx == vb.params.dx);
  CHECK(va.params.dy == vb.params.dy);
  CHECK(va.pixels.data == vb.pixels.data);

  SplitMix64 c(99);
  View id = sample_view(obs, c, 0);
  CHECK(id.params.dx == 0);
  CHECK(id.params.dy == 0);
  CHECK(id.pixels.data == obs.pixels.data);
}

TEST_CASE("sampled shift parameters are uniform") {
  env::MDPSpec spec = tiny_spec(6);
  env::Observation obs = env::render(spec, env::initial_state(spec, 0));
  SplitMix64 rng(21);
  std::map<std::pair<int, int>, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    View v = sample_view(obs, rng, 2);
    counts[{v.params.dx, v.params.dy}] += 1;
  }
  CHECK(counts.size() == 25);
  // expected 400 per cell, sigma = sqrt(n * p * (1-p)) ~ 19.6
  for (auto& [k, c] : counts) {
    (void)k;
    CHECK(std::abs(c - 400) <= 59);
  }
}

TEST_CASE("block structure holds on a small grid") {
  env::MDPSpec spec = tiny_spec(5);
  BlockReport r = check_block_structure(spec, 2);
  CHECK(r.disjoint);
  CHECK(r.decodable);
  CHECK(r.collisions.empty());
}

TEST_CASE("pad zero blocks are the states themselves") {
  env::MDPSpec spec = tiny_spec(4);
  BlockReport r = check_block_structure(spec, 0);
  CHECK(r.disjoint);
  CHECK(r.decodable);
}

TEST_CASE("all-black states collide across blocks") {
  std::vector<env::Observation> blocks;
  blocks.push_back({ad::zeros({1, 6, 6})});
  blocks.push_back({ad::zeros({1, 6, 6})});
  BlockReport r = check_block_structure(blocks, 1);
  CHECK_FALSE(r.disjoint);
  CHECK(r.decodable);  // zero shifts of zeros still decode to zeros
  CHECK(!r.collisions.empty());
}

TEST_CASE("oversized grid is refused") {
  env::MDPSpec spec = tiny_spec(9);
  CHECK_THROWS(check_block_structure(spec, 2));
}

TEST_CASE("transitions are view-consistent") {
  // stepping the decoded source of any view matches stepping the state
  env::MDPSpec spec = tiny_spec(4);
  auto states = env::enumerate_states(spec, 6);
  for (const auto& s : states) {
    env::Observation obs = env::render(spec, s);
    for (int dy = -2; dy <= 2; ++dy)
      for (int dx = -2; dx <= 2; ++dx) {
        auto decoded = env::state_from_pixels(spec, decode_view(render_view(obs, {dx, dy, 2})).pixels);
        REQUIRE(decoded.has_value());
        for (env::Action a :
             {env::Action::Left, env::Action::Stay, env::Action::Right}) {
          auto from_view = env::apply_action(spec, *decoded, a, 1);
          auto from_state = env::apply_action(spec, s, a, 1);
          CHECK(from_view.state.poses == from_state.state.poses);
          CHECK(from_view.reward == from_state.reward);
        }
      }
  }
}
