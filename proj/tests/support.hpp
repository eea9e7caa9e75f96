#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "mvsteg.hpp"

namespace mvsteg::testing {

inline plane make_plane(int w, int h, const std::function<int(int, int)>& fn) {
  plane p(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) p.at(x, y) = static_cast<std::uint8_t>(fn(x, y));
  return p;
}

inline video_sequence static_video(int w, int h, int frames, int noise = 0, std::uint64_t seed = 1) {
  synthetic_params p;
  p.model = motion_model::static_noise;
  p.noise_amplitude = noise;
  return generate_synthetic(w, h, frames, p, seed);
}

inline video_sequence pan_video(int w, int h, int frames, int ph, int pv, std::uint64_t seed = 1) {
  synthetic_params p;
  p.model = motion_model::global_pan;
  p.pan_h = ph;
  p.pan_v = pv;
  p.noise_amplitude = 0;
  return generate_synthetic(w, h, frames, p, seed);
}

// Many small objects with whole-pel velocities: a busy motion field.
inline video_sequence busy_video(int w, int h, int frames, std::uint64_t seed = 1) {
  synthetic_params p;
  p.model = motion_model::multi_object;
  p.pan_h = 1;
  p.pan_v = 0;
  p.noise_amplitude = 0;
  p.object_count = 12;
  p.min_object_size = 16;
  p.max_object_size = 40;
  p.max_object_speed16 = 48;
  p.velocity_step16 = 16;
  return generate_synthetic(w, h, frames, p, seed);
}

inline video_sequence black_video(int w, int h, int frames) {
  video_sequence v{w, h, {}};
  for (int t = 0; t < frames; ++t) v.frames.push_back(make_frame(w, h, 0));
  return v;
}

// Random calibrated sequence; partitions lean toward PSkip so both feature
// denominators are usually positive, and MVPs are small so every diff bin occurs.
inline calibrated_sequence random_calibrated(rng& g, int p_frames, int mbs_per_frame) {
  static constexpr partition_kind kinds[] = {partition_kind::p_skip, partition_kind::p_skip, partition_kind::p_skip,
                                             partition_kind::p16x16, partition_kind::p16x8,  partition_kind::p8x16,
                                             partition_kind::p8x8,   partition_kind::intra};
  auto record = [&](int frame, int mb) {
    macroblock_record r;
    r.frame_index = frame;
    r.mb_row = mb / 4;
    r.mb_col = mb % 4;
    r.partition = kinds[g.below(8)];
    r.mvp = {g.between(-3, 3), g.between(-3, 3)};
    for (int k = 0; k < sub_block_count(r.partition); ++k) r.mvs.push_back({g.between(-4, 4), g.between(-4, 4)});
    return r;
  };
  calibrated_sequence c;
  c.qp_first = c.qp_second = 25;
  c.mbs_per_frame = mbs_per_frame;
  for (int t = 1; t <= p_frames; ++t)
    for (int m = 0; m < mbs_per_frame; ++m) {
      auto a = record(t, m), b = record(t, m);
      c.pairs.push_back({t, a.mb_row, a.mb_col, a, b});
    }
  return c;
}

// Independent counter over a window of P-frames [start, start + len).
inline feature_array naive_features(const calibrated_sequence& c, std::size_t start, std::size_t len) {
  feature_array f{};
  double n = 0, m = 0;
  for (std::size_t t = start; t < start + len; ++t)
    for (int i = 0; i < c.mbs_per_frame; ++i) {
      const auto& p = c.pairs[t * c.mbs_per_frame + i];
      const bool s1 = p.first.partition == partition_kind::p_skip;
      const bool s2 = p.second.partition == partition_kind::p_skip;
      if (s1 && s2) {
        int d = std::abs(p.first.mvp.h - p.second.mvp.h) + std::abs(p.first.mvp.v - p.second.mvp.v);
        f[d >= 4 ? 4 : d] += 1;
        n += 1;
      }
      if (s2) {
        int cat = 5;
        if (p.first.partition == partition_kind::p_skip) cat = 0;
        if (p.first.partition == partition_kind::p16x16) cat = 1;
        if (p.first.partition == partition_kind::p16x8) cat = 2;
        if (p.first.partition == partition_kind::p8x16) cat = 3;
        if (p.first.partition == partition_kind::p8x8) cat = 4;
        f[5 + cat] += 1;
        m += 1;
      }
    }
  for (int i = 0; i < 5; ++i) f[i] = n > 0 ? f[i] / n : 0.0;
  for (int i = 5; i < 11; ++i) f[i] = m > 0 ? f[i] / m : 0.0;
  return f;
}

// Cover/stego pairs with `windows` samples per label; stego moves mass from
// feature 0 to feature 1 by `shift`. Each pair has its own baseline.
inline std::vector<labeled_sample> toy_corpus(std::uint64_t seed, int pairs, int windows, double shift) {
  rng g(seed);
  std::vector<labeled_sample> out;
  for (int p = 0; p < pairs; ++p) {
    feature_array base{};
    for (auto& v : base) v = g.uniform();
    for (int lbl = 0; lbl < 2; ++lbl)
      for (int w = 0; w < windows; ++w) {
        labeled_sample s;
        s.pair_id = p;
        s.lbl = lbl ? label::stego : label::cover;
        for (std::size_t d = 0; d < feature_dims; ++d) s.features[d] = base[d] + 0.05 * g.uniform();
        if (lbl) {
          s.features[0] -= shift;
          s.features[1] += shift;
        }
        out.push_back(s);
      }
  }
  return out;
}

class temp_dir {
public:
  explicit temp_dir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("mvsteg_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~temp_dir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace mvsteg::testing
