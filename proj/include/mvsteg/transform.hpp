#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "mvsteg/error.hpp"

namespace mvsteg {

inline constexpr int min_qp = 0;
inline constexpr int max_qp = 51;

inline double qstep(int qp) { return std::exp2((qp - 4) / 6.0); }

// Dead-zone rounding offset of the uniform quantizer.
inline constexpr double quant_rounding = 1.0 / 3.0;

// Coefficient order inside one 4x4 tile.
inline constexpr std::array<int, 16> zigzag4x4 = {0, 1, 4, 8, 5, 2, 3, 6, 9, 12, 13, 10, 7, 11, 14, 15};

namespace detail {

// Orthonormal DCT-II basis, row k = frequency.
inline const std::array<std::array<double, 4>, 4>& dct4_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 4>, 4> m{};
    for (int k = 0; k < 4; ++k) {
      const double a = k == 0 ? 0.5 : std::sqrt(0.5);
      for (int n = 0; n < 4; ++n) m[k][n] = a * std::cos((2 * n + 1) * k * std::numbers::pi / 8.0);
    }
    return m;
  }();
  return basis;
}

inline std::array<double, 16> forward_dct4(const std::array<double, 16>& x) {
  const auto& c = dct4_basis();
  std::array<double, 16> tmp{}, out{};
  for (int i = 0; i < 4; ++i)
    for (int l = 0; l < 4; ++l) {
      double s = 0;
      for (int n = 0; n < 4; ++n) s += x[i * 4 + n] * c[l][n];
      tmp[i * 4 + l] = s;
    }
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      double s = 0;
      for (int i = 0; i < 4; ++i) s += c[k][i] * tmp[i * 4 + l];
      out[k * 4 + l] = s;
    }
  return out;
}

inline std::array<double, 16> inverse_dct4(const std::array<double, 16>& y) {
  const auto& c = dct4_basis();
  std::array<double, 16> tmp{}, out{};
  for (int k = 0; k < 4; ++k)
    for (int n = 0; n < 4; ++n) {
      double s = 0;
      for (int l = 0; l < 4; ++l) s += y[k * 4 + l] * c[l][n];
      tmp[k * 4 + n] = s;
    }
  for (int i = 0; i < 4; ++i)
    for (int n = 0; n < 4; ++n) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += c[k][i] * tmp[k * 4 + n];
      out[i * 4 + n] = s;
    }
  return out;
}

inline void check_tiling(int width, int height) {
  auto ok = [](int d) { return d == 4 || d == 8 || d == 16; };
  if (!ok(width) || !ok(height)) throw invalid_argument("transform blocks must be 4, 8 or 16 wide/high");
}

inline void check_qp(int qp) {
  if (qp < min_qp || qp > max_qp) throw invalid_qp("qp " + std::to_string(qp) + " outside [0,51]");
}

}  // namespace detail

inline std::int16_t quantize(double coefficient, double step) {
  const double level = std::floor(std::abs(coefficient) / step + quant_rounding);
  const double clamped = std::min(level, static_cast<double>(std::numeric_limits<std::int16_t>::max()));
  return static_cast<std::int16_t>(coefficient < 0 ? -clamped : clamped);
}

// Tiles a width x height residual (row-major) into 4x4 blocks, transforms and
// quantizes each. Output: tiles in raster order, each tile in zigzag order.
inline std::vector<std::int16_t> transform_quantize(std::span<const int> residual, int width, int height,
                                                    int qp) {
  detail::check_tiling(width, height);
  detail::check_qp(qp);
  const double step = qstep(qp);
  std::vector<std::int16_t> out;
  out.reserve(residual.size());
  for (int ty = 0; ty < height; ty += 4) {
    for (int tx = 0; tx < width; tx += 4) {
      std::array<double, 16> block{};
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) block[y * 4 + x] = residual[(ty + y) * width + tx + x];
      const auto coeffs = detail::forward_dct4(block);
      for (int i : zigzag4x4) out.push_back(quantize(coeffs[i], step));
    }
  }
  return out;
}

// Inverse of transform_quantize up to quantization loss; residual samples are
// rounded to the nearest integer.
inline std::vector<int> dequantize_inverse(std::span<const std::int16_t> levels, int width, int height,
                                           int qp) {
  detail::check_tiling(width, height);
  detail::check_qp(qp);
  const double step = qstep(qp);
  std::vector<int> out(static_cast<std::size_t>(width) * height);
  std::size_t pos = 0;
  for (int ty = 0; ty < height; ty += 4) {
    for (int tx = 0; tx < width; tx += 4) {
      std::array<double, 16> coeffs{};
      for (int i : zigzag4x4) coeffs[i] = levels[pos++] * step;
      const auto block = detail::inverse_dct4(coeffs);
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
          out[(ty + y) * width + tx + x] = static_cast<int>(std::lround(block[y * 4 + x]));
    }
  }
  return out;
}

inline bool all_zero(std::span<const std::int16_t> levels) {
  return std::all_of(levels.begin(), levels.end(), [](std::int16_t l) { return l == 0; });
}

}  // namespace mvsteg
