#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mvsteg/calibration.hpp"
#include "mvsteg/error.hpp"

namespace mvsteg {

inline constexpr std::size_t f1_bins = 5;
inline constexpr std::size_t f2_bins = 6;
inline constexpr std::size_t feature_dims = f1_bins + f2_bins;

using feature_array = std::array<double, feature_dims>;

// Skipped-macroblock calibrated features of one window of P-frames:
// f[0..4] MVP-difference distribution of blocks skipped in both compressions,
// f[5..10] first-compression partition of blocks skipped in the recompression.
struct feature_vector {
  feature_array f{};
  int window_id = 0;
  int n_f1 = 0;
  int m_f2 = 0;
};

inline int mvp_diff(motion_vector first, motion_vector second) {
  return std::abs(first.h - second.h) + std::abs(first.v - second.v);
}

// Category of a first-compression partition: PSkip, 16x16, 16x8, 8x16, 8x8, else.
inline std::size_t partition_category(partition_kind p) {
  switch (p) {
    case partition_kind::p_skip: return 0;
    case partition_kind::p16x16: return 1;
    case partition_kind::p16x8: return 2;
    case partition_kind::p8x16: return 3;
    case partition_kind::p8x8: return 4;
    default: return 5;
  }
}

inline std::pair<std::array<double, f1_bins>, int> extract_f1(std::span<const calibrated_block_pair> pairs) {
  std::array<double, f1_bins> hist{};
  int n = 0;
  for (const auto& p : pairs) {
    if (p.first.partition != partition_kind::p_skip || p.second.partition != partition_kind::p_skip) continue;
    ++n;
    hist[std::min<std::size_t>(static_cast<std::size_t>(mvp_diff(p.first.mvp, p.second.mvp)), f1_bins - 1)] += 1;
  }
  if (n > 0)
    for (auto& h : hist) h /= n;
  return {hist, n};
}

inline std::pair<std::array<double, f2_bins>, int> extract_f2(std::span<const calibrated_block_pair> pairs) {
  std::array<double, f2_bins> hist{};
  int m = 0;
  for (const auto& p : pairs) {
    if (p.second.partition != partition_kind::p_skip) continue;
    ++m;
    hist[partition_category(p.first.partition)] += 1;
  }
  if (m > 0)
    for (auto& h : hist) h /= m;
  return {hist, m};
}

enum class window_mode { non_overlapping, sliding };

inline std::string_view to_string(window_mode m) {
  return m == window_mode::sliding ? "sliding" : "non-overlapping";
}

inline std::optional<window_mode> parse_window_mode(std::string_view s) {
  if (s == "non-overlapping") return window_mode::non_overlapping;
  if (s == "sliding") return window_mode::sliding;
  return std::nullopt;
}

inline constexpr int default_window_length = 5;

// Start offsets (in P-frames) of every window over `p_frames` P-frames.
inline std::vector<std::size_t> window_starts(std::size_t p_frames, std::size_t window_len, window_mode mode) {
  std::vector<std::size_t> starts;
  if (window_len == 0 || p_frames < window_len) return starts;
  const std::size_t stride = mode == window_mode::sliding ? 1 : window_len;
  for (std::size_t s = 0; s + window_len <= p_frames; s += stride) starts.push_back(s);
  return starts;
}

inline std::vector<feature_vector> extract_smcf(const calibrated_sequence& cal, int window_len = default_window_length,
                                                window_mode mode = window_mode::non_overlapping) {
  if (window_len < 1) throw invalid_argument("window length must be at least 1");
  const std::size_t per_frame = static_cast<std::size_t>(cal.mbs_per_frame);
  std::vector<feature_vector> out;
  int id = 0;
  for (std::size_t start : window_starts(cal.p_frame_count(), static_cast<std::size_t>(window_len), mode)) {
    const std::span<const calibrated_block_pair> window(cal.pairs.data() + start * per_frame,
                                                        static_cast<std::size_t>(window_len) * per_frame);
    const auto [f1, n] = extract_f1(window);
    const auto [f2, m] = extract_f2(window);
    feature_vector v;
    std::copy(f1.begin(), f1.end(), v.f.begin());
    std::copy(f2.begin(), f2.end(), v.f.begin() + f1_bins);
    v.window_id = id++;
    v.n_f1 = n;
    v.m_f2 = m;
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature CSV: sequence_id,window_id,label,n_f1,m_f2,f0..f10

enum class label : int { cover = -1, stego = 1 };

inline std::string_view to_string(label l) { return l == label::cover ? "cover" : "stego"; }

struct feature_row {
  std::string sequence_id;
  label lbl = label::cover;
  feature_vector features;
};

inline std::string feature_csv_header() {
  std::string h = "sequence_id,window_id,label,n_f1,m_f2";
  for (std::size_t i = 0; i < feature_dims; ++i) h += ",f" + std::to_string(i);
  return h;
}

inline std::string format_feature_row(const feature_row& r) {
  std::string line = r.sequence_id + "," + std::to_string(r.features.window_id) + "," +
                     std::string(to_string(r.lbl)) + "," + std::to_string(r.features.n_f1) + "," +
                     std::to_string(r.features.m_f2);
  char buf[32];
  for (double v : r.features.f) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    line += buf;
  }
  return line;
}

inline void write_feature_csv(std::ostream& os, std::span<const feature_row> rows) {
  os << feature_csv_header() << '\n';
  for (const auto& r : rows) os << format_feature_row(r) << '\n';
}

inline std::vector<feature_row> read_feature_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != feature_csv_header()) throw invalid_argument("missing feature CSV header");
  std::vector<feature_row> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5 + feature_dims) {
      throw invalid_argument("feature CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                             " fields");
    }
    feature_row r;
    r.sequence_id = cells[0];
    try {
      r.features.window_id = std::stoi(cells[1]);
      if (cells[2] == "cover") {
        r.lbl = label::cover;
      } else if (cells[2] == "stego") {
        r.lbl = label::stego;
      } else {
        throw invalid_argument("bad label '" + cells[2] + "'");
      }
      r.features.n_f1 = std::stoi(cells[3]);
      r.features.m_f2 = std::stoi(cells[4]);
      for (std::size_t i = 0; i < feature_dims; ++i) r.features.f[i] = std::stod(cells[5 + i]);
    } catch (const std::logic_error&) {
      throw invalid_argument("unparsable value on feature CSV line " + std::to_string(line_no));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mvsteg
