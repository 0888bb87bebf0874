#include "vcd/augment.hpp"

#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace vcd::aug {

namespace {

ad::Tensor shift_pixels(const ad::Tensor& in, int dx, int dy) {
  if (in.shape.size() != 3)
    throw std::invalid_argument("shift: pixels of shape " + ad::shape_str(in.shape) +
                                " are not [l,H,W]");
  const int l = in.shape[0], h = in.shape[1], w = in.shape[2];
  ad::Tensor out = ad::zeros(in.shape);
  for (int c = 0; c < l; ++c) {
    const double* src = in.data.data() + static_cast<int64_t>(c) * h * w;
    double* dst = out.data.data() + static_cast<int64_t>(c) * h * w;
    for (int y = 0; y < h; ++y) {
      const int sy = y - dy;
      if (sy < 0 || sy >= h) continue;
      for (int x = 0; x < w; ++x) {
        const int sx = x - dx;
        if (sx < 0 || sx >= w) continue;
        dst[y * w + x] = src[sy * w + sx];
      }
    }
  }
  return out;
}

uint64_t pixels_hash(const ad::Tensor& t) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : t.data) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace

View render_view(const env::Observation& obs, const AugmentationParams& params) {
  if (params.pad < 0) throw std::invalid_argument("render_view: negative pad");
  if (std::abs(params.dx) > params.pad || std::abs(params.dy) > params.pad)
    throw std::invalid_argument("render_view: shift exceeds pad");
  return View{shift_pixels(obs.pixels, params.dx, params.dy), params, -1};
}

env::Observation decode_view(const View& view) {
  return env::Observation{shift_pixels(view.pixels, -view.params.dx, -view.params.dy)};
}

View sample_view(const env::Observation& obs, SplitMix64& rng, int pad) {
  AugmentationParams p;
  p.pad = pad;
  p.dx = rng.next_range(-pad, pad);
  p.dy = rng.next_range(-pad, pad);
  return render_view(obs, p);
}

BlockReport check_block_structure(const std::vector<env::Observation>& blocks, int pad) {
  BlockReport report;
  report.disjoint = true;
  report.decodable = true;

  struct Entry {
    int block;
    int dx, dy;
  };
  std::unordered_map<uint64_t, std::vector<Entry>> buckets;

  for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
    for (int dy = -pad; dy <= pad; ++dy)
      for (int dx = -pad; dx <= pad; ++dx) {
        AugmentationParams p{dx, dy, pad};
        View v = render_view(blocks[static_cast<size_t>(b)], p);
        if (decode_view(v).pixels.data != blocks[static_cast<size_t>(b)].pixels.data)
          report.decodable = false;
        buckets[pixels_hash(v.pixels)].push_back({b, dx, dy});
      }
  }

  // Hash buckets narrow the search; collisions are confirmed on real pixels.
  for (auto& [hash, entries] : buckets) {
    (void)hash;
    if (entries.size() < 2) continue;
    bool cross_block = false;
    for (size_t i = 1; i < entries.size() && !cross_block; ++i)
      cross_block = entries[i].block != entries[0].block;
    if (!cross_block) continue;
    for (size_t i = 0; i < entries.size(); ++i)
      for (size_t j = i + 1; j < entries.size(); ++j) {
        const Entry &a = entries[i], &b = entries[j];
        if (a.block == b.block) continue;
        View va = render_view(blocks[static_cast<size_t>(a.block)], {a.dx, a.dy, pad});
        View vb = render_view(blocks[static_cast<size_t>(b.block)], {b.dx, b.dy, pad});
        if (va.pixels.data == vb.pixels.data) {
          report.disjoint = false;
          report.collisions.push_back(
              {a.block, b.block, {a.dx, a.dy, pad}, {b.dx, b.dy, pad}});
        }
      }
  }
  return report;
}

BlockReport check_block_structure(const env::MDPSpec& spec, int pad) {
  if (spec.grid_size > 8)
    throw std::invalid_argument("check_block_structure: grid_size above 8 refused");
  std::vector<env::Observation> blocks;
  for (const auto& s : env::enumerate_states(spec)) blocks.push_back(env::render(spec, s));
  return check_block_structure(blocks, pad);
}

}  // namespace vcd::aug
