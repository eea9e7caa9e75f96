#pragma once

#include <array>
#include <cstdlib>
#include <optional>
#include <string_view>

#include "mvsteg/motion_vector.hpp"
#include "mvsteg/yuv_io.hpp"

namespace mvsteg {

enum class search_strategy { full, hexagon };

inline std::string_view to_string(search_strategy s) { return s == search_strategy::full ? "full" : "hexagon"; }

inline std::optional<search_strategy> parse_search_strategy(std::string_view s) {
  if (s == "full") return search_strategy::full;
  if (s == "hexagon" || s == "hex") return search_strategy::hexagon;
  return std::nullopt;
}

inline constexpr int default_search_range = 16;

struct block_rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

inline bool displaced_inside(const plane& ref, block_rect b, motion_vector mv) {
  const int x = b.x + mv.h, y = b.y + mv.v;
  return x >= 0 && y >= 0 && x + b.w <= ref.width && y + b.h <= ref.height;
}

// Sum of absolute differences between block b of cur and the mv-displaced
// block of ref. The displaced block must lie inside ref.
inline int block_sad(const plane& cur, const plane& ref, block_rect b, motion_vector mv) {
  int sad = 0;
  for (int y = 0; y < b.h; ++y) {
    const std::uint8_t* c = &cur.samples[static_cast<std::size_t>(b.y + y) * cur.width + b.x];
    const std::uint8_t* r =
        &ref.samples[static_cast<std::size_t>(b.y + y + mv.v) * ref.width + b.x + mv.h];
    for (int x = 0; x < b.w; ++x) sad += std::abs(c[x] - r[x]);
  }
  return sad;
}

struct motion_search_result {
  motion_vector mv;
  int sad = 0;
  double cost = 0;
};

// Rate-constrained block matching: minimizes SAD + lambda_motion * mvd_bits(mv - mvp)
// over integer positions with |h|,|v| <= range whose reference block lies in
// the frame. Ties keep the first candidate visited (raster order for full
// search).
class motion_searcher {
public:
  motion_searcher(const plane& cur, const plane& ref, block_rect block, motion_vector mvp, int range,
                  double lambda_motion)
      : cur_(cur), ref_(ref), block_(block), mvp_(mvp), range_(range), lambda_(lambda_motion) {}

  bool admissible(motion_vector mv) const {
    return std::abs(mv.h) <= range_ && std::abs(mv.v) <= range_ && displaced_inside(ref_, block_, mv);
  }

  // Cost of one candidate; the candidate must be admissible.
  motion_search_result evaluate(motion_vector mv) const {
    const int sad = block_sad(cur_, ref_, block_, mv);
    return {mv, sad, sad + lambda_ * mvd_bits(compute_mvd(mv, mvp_))};
  }

  motion_search_result full() const {
    motion_search_result best = evaluate({0, 0});
    for (int v = -range_; v <= range_; ++v) {
      for (int h = -range_; h <= range_; ++h) {
        const motion_vector mv{h, v};
        if (!admissible(mv)) continue;
        const auto r = evaluate(mv);
        if (r.cost < best.cost || (r.cost == best.cost && raster_before(mv, best.mv))) best = r;
      }
    }
    return best;
  }

  motion_search_result hexagon() const {
    motion_search_result best = evaluate({0, 0});
    if (!(mvp_ == motion_vector{}) && admissible(mvp_)) {
      const auto r = evaluate(mvp_);
      if (r.cost <= best.cost) best = r;
    }
    static constexpr std::array<motion_vector, 6> large = {
        {{-2, 0}, {-1, -2}, {1, -2}, {2, 0}, {1, 2}, {-1, 2}}};
    static constexpr std::array<motion_vector, 8> square = {
        {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
    for (int iter = 0; iter < 2 * range_ + 2; ++iter) {
      if (!step(best, large)) break;
    }
    for (int iter = 0; iter < 2 * range_ + 2; ++iter) {
      if (!step(best, square)) break;
    }
    return best;
  }

  motion_search_result run(search_strategy s) const { return s == search_strategy::full ? full() : hexagon(); }

private:
  static bool raster_before(motion_vector a, motion_vector b) { return a.v < b.v || (a.v == b.v && a.h < b.h); }

  template <std::size_t N>
  bool step(motion_search_result& best, const std::array<motion_vector, N>& pattern) const {
    const motion_vector center = best.mv;
    bool moved = false;
    for (const auto& d : pattern) {
      const motion_vector mv = center + d;
      if (!admissible(mv)) continue;
      const auto r = evaluate(mv);
      if (r.cost < best.cost) {
        best = r;
        moved = true;
      }
    }
    return moved;
  }

  const plane& cur_;
  const plane& ref_;
  block_rect block_;
  motion_vector mvp_;
  int range_;
  double lambda_;
};

inline motion_search_result motion_estimate(const plane& cur, const plane& ref, block_rect block,
                                            motion_vector mvp, int range, search_strategy strategy,
                                            double lambda_motion) {
  return motion_searcher(cur, ref, block, mvp, range, lambda_motion).run(strategy);
}

}  // namespace mvsteg
