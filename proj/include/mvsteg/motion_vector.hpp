#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <ostream>

namespace mvsteg {

// Integer-pel displacement. The reference block's top-left corner is the
// current block's top-left corner plus (h, v).
struct motion_vector {
  int h = 0;
  int v = 0;

  friend bool operator==(const motion_vector&, const motion_vector&) = default;
  friend motion_vector operator-(motion_vector a, motion_vector b) { return {a.h - b.h, a.v - b.v}; }
  friend motion_vector operator+(motion_vector a, motion_vector b) { return {a.h + b.h, a.v + b.v}; }
  friend std::ostream& operator<<(std::ostream& os, motion_vector mv) {
    return os << '(' << mv.h << ',' << mv.v << ')';
  }
};

namespace detail {

inline int median3(int a, int b, int c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

}  // namespace detail

// Median motion vector prediction from the left (A), top (B) and top-right (C)
// neighbours. With only A available the prediction is A, with none it is zero;
// otherwise every missing neighbour enters the median as (0,0).
inline motion_vector predict_mvp(std::optional<motion_vector> left, std::optional<motion_vector> top,
                                 std::optional<motion_vector> topright) {
  if (!left && !top && !topright) return {};
  if (left && !top && !topright) return *left;
  const motion_vector a = left.value_or(motion_vector{});
  const motion_vector b = top.value_or(motion_vector{});
  const motion_vector c = topright.value_or(motion_vector{});
  return {detail::median3(a.h, b.h, c.h), detail::median3(a.v, b.v, c.v)};
}

inline motion_vector compute_mvd(motion_vector mv, motion_vector mvp) { return mv - mvp; }

// Length in bits of the signed exponential-Golomb code se(v).
inline int signed_exp_golomb_length(int x) {
  const std::uint32_t code_num = x > 0 ? 2u * static_cast<std::uint32_t>(x) - 1u
                                       : 2u * static_cast<std::uint32_t>(-static_cast<std::int64_t>(x));
  return 2 * (std::bit_width(code_num + 1u) - 1) + 1;
}

inline int mvd_bits(motion_vector mvd) {
  return signed_exp_golomb_length(mvd.h) + signed_exp_golomb_length(mvd.v);
}

}  // namespace mvsteg
