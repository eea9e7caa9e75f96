#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvsteg/error.hpp"
#include "mvsteg/random.hpp"

namespace mvsteg {

inline constexpr int mb_size = 16;

// One 8-bit sample plane, row-major.
struct plane {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  plane() = default;
  plane(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const plane&) const = default;
};

struct yuv_frame {
  plane luma;
  plane cb;
  plane cr;

  bool operator==(const yuv_frame&) const = default;
};

inline int chroma_extent(int luma_extent) { return (luma_extent + 1) / 2; }

inline yuv_frame make_frame(int width, int height, std::uint8_t luma_fill = 0,
                            std::uint8_t chroma_fill = 128) {
  return {plane(width, height, luma_fill),
          plane(chroma_extent(width), chroma_extent(height), chroma_fill),
          plane(chroma_extent(width), chroma_extent(height), chroma_fill)};
}

// A planar 4:2:0 sequence. The codec works on luma only; chroma is carried
// through I/O untouched.
struct video_sequence {
  int width = 0;
  int height = 0;
  std::vector<yuv_frame> frames;

  std::size_t frame_count() const { return frames.size(); }
  int mb_cols() const { return width / mb_size; }
  int mb_rows() const { return height / mb_size; }

  bool operator==(const video_sequence&) const = default;
};

inline std::size_t frame_bytes(int width, int height) {
  return static_cast<std::size_t>(width) * height +
         2 * static_cast<std::size_t>(chroma_extent(width)) * chroma_extent(height);
}

inline bool macroblock_aligned(int width, int height) {
  return width > 0 && height > 0 && width % mb_size == 0 && height % mb_size == 0;
}

namespace detail {

// Edge-replicates a plane to (w, h); w/h must be >= the plane's extent.
inline plane pad_plane(const plane& p, int w, int h) {
  plane out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(y, p.height - 1);
    for (int x = 0; x < w; ++x) out.at(x, y) = p.at(std::min(x, p.width - 1), sy);
  }
  return out;
}

}  // namespace detail

enum class padding { reject, replicate };

// Pads a sequence to the next macroblock multiple by replicating the right
// and bottom edges.
inline video_sequence pad_to_macroblocks(const video_sequence& in) {
  const int w = (in.width + mb_size - 1) / mb_size * mb_size;
  const int h = (in.height + mb_size - 1) / mb_size * mb_size;
  if (w == in.width && h == in.height) return in;
  video_sequence out{w, h, {}};
  out.frames.reserve(in.frames.size());
  for (const auto& f : in.frames) {
    out.frames.push_back({detail::pad_plane(f.luma, w, h),
                          detail::pad_plane(f.cb, chroma_extent(w), chroma_extent(h)),
                          detail::pad_plane(f.cr, chroma_extent(w), chroma_extent(h))});
  }
  return out;
}

// Parses raw planar 4:2:0 bytes (Y, then Cb, then Cr per frame).
inline video_sequence parse_yuv(std::span<const std::uint8_t> bytes, int width, int height,
                                padding pad = padding::reject) {
  if (width <= 0 || height <= 0) throw invalid_argument("frame dimensions must be positive");
  if (!macroblock_aligned(width, height) && pad == padding::reject) {
    throw dimension_not_aligned("dimensions " + std::to_string(width) + "x" +
                                std::to_string(height) + " are not multiples of 16");
  }
  const std::size_t per_frame = frame_bytes(width, height);
  if (bytes.size() % per_frame != 0) {
    throw truncated_file("size " + std::to_string(bytes.size()) +
                         " is not a multiple of the frame size " + std::to_string(per_frame));
  }
  video_sequence seq{width, height, {}};
  const std::size_t n = bytes.size() / per_frame;
  seq.frames.reserve(n);
  auto it = bytes.begin();
  auto read_plane = [&it](int w, int h) {
    plane p(w, h);
    std::copy_n(it, p.samples.size(), p.samples.begin());
    it += static_cast<std::ptrdiff_t>(p.samples.size());
    return p;
  };
  const int cw = chroma_extent(width), ch = chroma_extent(height);
  for (std::size_t i = 0; i < n; ++i) {
    yuv_frame f;
    f.luma = read_plane(width, height);
    f.cb = read_plane(cw, ch);
    f.cr = read_plane(cw, ch);
    seq.frames.push_back(std::move(f));
  }
  return pad == padding::replicate ? pad_to_macroblocks(seq) : seq;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("short write to " + path.string());
}

inline video_sequence read_yuv(const std::filesystem::path& path, int width, int height,
                               padding pad = padding::reject) {
  const auto bytes = read_file(path);
  return parse_yuv(bytes, width, height, pad);
}

inline std::vector<std::uint8_t> format_yuv(const video_sequence& seq) {
  std::vector<std::uint8_t> out;
  out.reserve(frame_bytes(seq.width, seq.height) * seq.frames.size());
  for (const auto& f : seq.frames) {
    for (const plane* p : {&f.luma, &f.cb, &f.cr}) {
      out.insert(out.end(), p->samples.begin(), p->samples.end());
    }
  }
  return out;
}

inline void write_yuv(const std::filesystem::path& path, const video_sequence& seq) {
  write_file(path, format_yuv(seq));
}

// ---------------------------------------------------------------------------
// Synthetic sequences

enum class motion_model { global_pan, multi_object, static_noise };

inline std::string_view to_string(motion_model m) {
  switch (m) {
    case motion_model::global_pan: return "global-pan";
    case motion_model::multi_object: return "multi-object";
    case motion_model::static_noise: return "static+noise";
  }
  return "?";
}

inline std::optional<motion_model> parse_motion_model(std::string_view s) {
  if (s == "global-pan") return motion_model::global_pan;
  if (s == "multi-object") return motion_model::multi_object;
  if (s == "static+noise" || s == "static-noise") return motion_model::static_noise;
  return std::nullopt;
}

struct synthetic_params {
  motion_model model = motion_model::global_pan;
  // Per-frame content displacement in pels plus sixteenths of a pel; used by
  // global-pan, and as the background drift of multi-object.
  int pan_h = 1;
  int pan_v = 0;
  int subpel_h = 0;
  int subpel_v = 0;
  // Amplitude of i.i.d. uniform integer noise added to every luma sample.
  // Unset means 2 for static+noise and 0 otherwise.
  std::optional<int> noise_amplitude;
  int object_count = 3;
  // Fastest object speed per axis, in sixteenths of a pel per frame.
  int max_object_speed16 = 48;
  // Object velocities are multiples of this many sixteenths (16 = whole pels).
  int velocity_step16 = 1;
  // Object side length range in pels; unset means a fifth to a half of the frame.
  std::optional<int> min_object_size;
  std::optional<int> max_object_size;
};

namespace detail {

// Value-noise texture sampled in 1/16-pel coordinates, fixed-point so that
// every platform produces identical samples. A low-frequency activity mask
// gates the fine detail, so a frame mixes flat, gently shaded areas with busy
// ones; `busy` textures are detailed everywhere.
class texture {
public:
  explicit texture(std::uint64_t seed, bool busy = false) : seed_(seed), busy_(busy) {}

  int operator()(long x, long y) const { return sample16(16 * x, 16 * y); }

  int sample16(long x16, long y16) const {
    // octave() returns [-256, 256].
    const long base = (octave(x16, y16, 64, 0) * 32 + octave(x16, y16, 32, 1) * 12) / 256;
    const long detail = (octave(x16, y16, 16, 2) * 30 + octave(x16, y16, 8, 3) * 24 + octave(x16, y16, 4, 4) * 16 +
                         octave(x16, y16, 2, 5) * 10) /
                        256;
    const long mask = busy_ ? 256 : std::clamp<long>(2 * octave(x16, y16, 48, 6), 0, 256);
    return static_cast<int>(std::clamp<long>(128 + base + detail * mask / 256, 0, 255));
  }

private:
  static long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

  int lattice(long ix, long iy, int octave) const {
    const auto h = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(ix) * 0x9E3779B1ull +
                                                 (static_cast<std::uint64_t>(iy) << 32) +
                                                 static_cast<std::uint64_t>(octave)));
    return static_cast<int>(h % 513) - 256;
  }

  // Smoothstep weight in 1/256 units for offset t in [0, span).
  static long smooth(long t, long span) {
    const long u = t * 256 / span;
    return u * u * (768 - 2 * u) / 65536;
  }

  long octave(long x16, long y16, int cell, int o) const {
    const long span = 16L * cell;
    const long ix = floor_div(x16, span), iy = floor_div(y16, span);
    const long wx = smooth(x16 - ix * span, span), wy = smooth(y16 - iy * span, span);
    const long a = lattice(ix, iy, o), b = lattice(ix + 1, iy, o);
    const long c = lattice(ix, iy + 1, o), d = lattice(ix + 1, iy + 1, o);
    const long top = a * (256 - wx) + b * wx;
    const long bottom = c * (256 - wx) + d * wx;
    return (top * (256 - wy) + bottom * wy) / 65536;
  }

  std::uint64_t seed_;
  bool busy_;
};

inline void derive_chroma(yuv_frame& f) {
  for (int y = 0; y < f.cb.height; ++y) {
    for (int x = 0; x < f.cb.width; ++x) {
      int sum = 0, n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int lx = 2 * x + dx, ly = 2 * y + dy;
          if (lx < f.luma.width && ly < f.luma.height) {
            sum += f.luma.at(lx, ly);
            ++n;
          }
        }
      }
      const int dev = sum / n - 128;
      f.cb.at(x, y) = static_cast<std::uint8_t>(128 + dev / 4);
      f.cr.at(x, y) = static_cast<std::uint8_t>(128 - dev / 8);
    }
  }
}

// Positions are in sixteenths of a pel.
struct moving_object {
  long x16 = 0, y16 = 0;
  int w = 0, h = 0;
  int vx16 = 0, vy16 = 0;
  texture tex;
};

inline long floor_mod(long a, long m) { return ((a % m) + m) % m; }

}  // namespace detail

// Deterministic synthetic sequence; a pure function of its arguments.
inline video_sequence generate_synthetic(int width, int height, int n_frames, const synthetic_params& params,
                                         std::uint64_t seed) {
  if (n_frames < 2) throw invalid_argument("synthetic sequences need at least 2 frames");
  if (width <= 0 || height <= 0) throw invalid_argument("frame dimensions must be positive");
  const int noise = params.noise_amplitude.value_or(params.model == motion_model::static_noise ? 2 : 0);
  if (noise < 0) throw invalid_argument("noise amplitude must be non-negative");

  rng gen(derive_seed(seed, 1));
  const detail::texture background(derive_seed(seed, 2));
  std::vector<detail::moving_object> objects;
  if (params.model == motion_model::multi_object) {
    if (params.object_count < 3) throw invalid_argument("multi-object needs at least 3 objects");
    const int step = std::max(1, params.velocity_step16);
    const int vmax = std::max(1, params.max_object_speed16 / step);
    if (params.object_count > (2 * vmax + 1) * (2 * vmax + 1) - 1)
      throw invalid_argument("too many objects for the distinct velocities available");
    const int lo_w = params.min_object_size.value_or(std::max(8, width / 5));
    const int hi_w = params.max_object_size.value_or(std::max(8, width / 2));
    const int lo_h = params.min_object_size.value_or(std::max(8, height / 5));
    const int hi_h = params.max_object_size.value_or(std::max(8, height / 2));
    if (lo_w < 1 || lo_h < 1 || hi_w < lo_w || hi_h < lo_h) throw invalid_argument("bad object size range");
    std::vector<std::pair<int, int>> used;
    for (int i = 0; i < params.object_count; ++i) {
      detail::moving_object o{0, 0, 0, 0, 0, 0, detail::texture(derive_seed(seed, 100 + i), true)};
      o.w = gen.between(lo_w, hi_w);
      o.h = gen.between(lo_h, hi_h);
      o.x16 = 16L * gen.between(0, std::max(0, width - o.w));
      o.y16 = 16L * gen.between(0, std::max(0, height - o.h));
      do {
        o.vx16 = step * gen.between(-vmax, vmax);
        o.vy16 = step * gen.between(-vmax, vmax);
      } while ((o.vx16 == 0 && o.vy16 == 0) ||
               std::find(used.begin(), used.end(), std::pair{o.vx16, o.vy16}) != used.end());
      used.emplace_back(o.vx16, o.vy16);
      objects.push_back(o);
    }
  }

  const long step_h16 = 16L * params.pan_h + params.subpel_h;
  const long step_v16 = 16L * params.pan_v + params.subpel_v;
  video_sequence seq{width, height, {}};
  seq.frames.reserve(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t) {
    yuv_frame f = make_frame(width, height);
    const bool moving_bg = params.model != motion_model::static_noise;
    const long sx16 = moving_bg ? step_h16 * t : 0;
    const long sy16 = moving_bg ? step_v16 * t : 0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        f.luma.at(x, y) = static_cast<std::uint8_t>(background.sample16(16L * x - sx16, 16L * y - sy16));
      }
    }
    for (const auto& o : objects) {
      // Objects wrap around an extended canvas so they keep re-entering view.
      const long px16 = detail::floor_mod(o.x16 + static_cast<long>(o.vx16) * t, 16L * (width + o.w)) - 16L * o.w;
      const long py16 = detail::floor_mod(o.y16 + static_cast<long>(o.vy16) * t, 16L * (height + o.h)) - 16L * o.h;
      const long left = px16 >= 0 ? px16 / 16 : -((-px16 + 15) / 16);
      const long top = py16 >= 0 ? py16 / 16 : -((-py16 + 15) / 16);
      for (long y = std::max(0L, top); y < std::min<long>(height, top + o.h); ++y) {
        for (long x = std::max(0L, left); x < std::min<long>(width, left + o.w); ++x) {
          f.luma.at(static_cast<int>(x), static_cast<int>(y)) =
              static_cast<std::uint8_t>(o.tex.sample16(16 * x - px16, 16 * y - py16));
        }
      }
    }
    if (noise > 0) {
      for (auto& s : f.luma.samples) s = static_cast<std::uint8_t>(std::clamp(s + gen.between(-noise, noise), 0, 255));
    }
    detail::derive_chroma(f);
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace mvsteg
