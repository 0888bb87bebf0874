#pragma once

#include <vector>

#include "vcd/env.hpp"
#include "vcd/prng.hpp"
#include "vcd/tensor.hpp"

namespace vcd::aug {

struct AugmentationParams {
  int dx = 0;
  int dy = 0;
  int pad = 4;
};

struct View {
  ad::Tensor pixels;
  AugmentationParams params;
  int source_hint = -1;  // test bookkeeping, never read by the model path
};

// Translates every channel by (dx, dy), right and down positive; vacated
// pixels are 0. Throws when |dx| or |dy| exceeds pad.
View render_view(const env::Observation& obs, const AugmentationParams& params);

// Inverse translation, the perfect decoder for in-frame content.
env::Observation decode_view(const View& view);

// dx then dy, each uniform over [-pad, pad].
View sample_view(const env::Observation& obs, SplitMix64& rng, int pad = 4);

struct BlockCollision {
  int state_a = 0;
  int state_b = 0;
  AugmentationParams params_a;
  AugmentationParams params_b;
};

struct BlockReport {
  bool disjoint = false;
  bool decodable = false;
  std::vector<BlockCollision> collisions;
};

// Exhaustive check over a list of source observations: no view of block i
// may equal any view of block j != i (disjoint), and decode_view must
// restore every source exactly (decodable).
BlockReport check_block_structure(const std::vector<env::Observation>& blocks, int pad);

// Same check over every reachable state of the environment. Refuses
// grid_size > 8; the cross product of states and shift params gets large.
BlockReport check_block_structure(const env::MDPSpec& spec, int pad = 4);

}  // namespace vcd::aug
