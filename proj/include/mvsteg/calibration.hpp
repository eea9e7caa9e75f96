#pragma once

#include <optional>
#include <vector>

#include "mvsteg/codec.hpp"
#include "mvsteg/error.hpp"

namespace mvsteg {

// One macroblock seen in the original compression and in the recompression.
struct calibrated_block_pair {
  int frame_index = 0;
  int mb_row = 0;
  int mb_col = 0;
  macroblock_record first;
  macroblock_record second;
};

struct calibrated_sequence {
  // P-frame macroblocks, frame-major then raster order.
  std::vector<calibrated_block_pair> pairs;
  int qp_first = 0;
  int qp_second = 0;
  int mbs_per_frame = 0;

  std::size_t p_frame_count() const {
    return mbs_per_frame == 0 ? 0 : pairs.size() / static_cast<std::size_t>(mbs_per_frame);
  }
};

// Encoder settings the container header does not carry. The analyst supplies
// them; they default to the corpus encoder's settings.
struct recompression_settings {
  int search_range = default_search_range;
  search_strategy strategy = search_strategy::hexagon;
};

struct calibration_result {
  calibrated_sequence sequence;
  encoded_stream recompressed;
};

// Pairs the P-frame records of two decodes of the same grid.
inline std::vector<calibrated_block_pair> align_records(const std::vector<macroblock_record>& first,
                                                        const std::vector<macroblock_record>& second,
                                                        const encoded_stream& first_stream,
                                                        const encoded_stream& second_stream) {
  const std::size_t per_frame = static_cast<std::size_t>(first_stream.mbs_per_frame());
  const std::size_t frames = std::min(first_stream.frames.size(), second_stream.frames.size());
  std::vector<calibrated_block_pair> pairs;
  for (std::size_t t = 0; t < frames; ++t) {
    if (first_stream.frames[t].type != frame_type::p || second_stream.frames[t].type != frame_type::p) continue;
    for (std::size_t m = 0; m < per_frame; ++m) {
      const auto& a = first[t * per_frame + m];
      const auto& b = second[t * per_frame + m];
      pairs.push_back({a.frame_index, a.mb_row, a.mb_col, a, b});
    }
  }
  return pairs;
}

// Decode, re-encode the decoded pixels with the header's parameters (QP
// optionally overridden), decode again, and align the two traces.
// Recompression never embeds.
inline calibration_result calibrate_detailed(const encoded_stream& stream, std::optional<int> qp_override = {},
                                             const recompression_settings& settings = {}) {
  const auto first = decode_sequence(stream);
  encoder_config cfg;
  cfg.qp = qp_override.value_or(stream.header.qp);
  cfg.gop_size = stream.header.gop_size;
  cfg.search_range = settings.search_range;
  cfg.strategy = settings.strategy;
  cfg.seed = stream.header.seed;
  calibration_result out;
  out.recompressed = encode_sequence(first.video, cfg);
  const auto second = decode_sequence(out.recompressed);
  out.sequence.pairs = align_records(first.records, second.records, stream, out.recompressed);
  out.sequence.qp_first = stream.header.qp;
  out.sequence.qp_second = cfg.qp;
  out.sequence.mbs_per_frame = stream.mbs_per_frame();
  return out;
}

inline calibrated_sequence calibrate(const encoded_stream& stream, std::optional<int> qp_override = {},
                                     const recompression_settings& settings = {}) {
  return calibrate_detailed(stream, qp_override, settings).sequence;
}

// Fraction of first-compression PSkip blocks that stay PSkip after recompression.
inline double retained_skip_fraction(const calibrated_sequence& cal) {
  std::size_t skipped = 0, retained = 0;
  for (const auto& p : cal.pairs) {
    if (p.first.partition != partition_kind::p_skip) continue;
    ++skipped;
    retained += p.second.partition == partition_kind::p_skip;
  }
  if (skipped == 0) throw no_skip_blocks("no PSkip macroblocks in the original compression");
  return static_cast<double>(retained) / static_cast<double>(skipped);
}

}  // namespace mvsteg
