#pragma once

#include <cstdint>

namespace vcd {

// splitmix64 stream. The exact update and output mix are part of the file
// format contract: recorded trajectories replay identically in any
// implementation of this generator.
struct SplitMix64 {
  uint64_t state = 0;

  SplitMix64() = default;
  explicit SplitMix64(uint64_t seed) : state(seed) {}

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    return mix(state);
  }

  // Uniform in [0, n). Plain modulo reduction; the bias is of order n / 2^64
  // and the simple rule keeps cross-language ports exact.
  int next_below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }

  // Uniform integer in [lo, hi], inclusive.
  int next_range(int lo, int hi) { return lo + next_below(hi - lo + 1); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Seed for an independent substream of a master seed. Every consumer of
// randomness in a run (environment, augmentation, init, replay, acting,
// evaluation) gets its own stream id so a change in one consumer cannot
// shift the draws of another.
inline uint64_t substream_seed(uint64_t master, uint64_t stream_id) {
  return SplitMix64::mix(master ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1)));
}

}  // namespace vcd
