#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mvsteg/error.hpp"
#include "mvsteg/motion_search.hpp"
#include "mvsteg/motion_vector.hpp"
#include "mvsteg/stream.hpp"
#include "mvsteg/transform.hpp"
#include "mvsteg/yuv_io.hpp"

namespace mvsteg {

struct encoder_config {
  int qp = 25;
  int gop_size = 6;
  int search_range = default_search_range;
  search_strategy strategy = search_strategy::hexagon;
  // Recorded in the stream header; the encoder itself draws no randomness.
  std::uint64_t seed = 0;
};

inline double lambda_mode(int qp) { return 0.85 * std::exp2((qp - 12) / 3.0); }
inline double lambda_motion(int qp) { return std::sqrt(lambda_mode(qp)); }

inline int partition_header_bits(partition_kind p) { return 4 + std::max(0, sub_block_count(p) - 1); }

// Geometry of sub-block `index` (raster order) of the macroblock at (mb_x, mb_y).
inline block_rect sub_block(partition_kind p, int index, int mb_x, int mb_y) {
  switch (p) {
    case partition_kind::p16x8: return {mb_x, mb_y + 8 * index, 16, 8};
    case partition_kind::p8x16: return {mb_x + 8 * index, mb_y, 8, 16};
    case partition_kind::p8x8: return {mb_x + 8 * (index % 2), mb_y + 8 * (index / 2), 8, 8};
    default: return {mb_x, mb_y, 16, 16};
  }
}

// ---------------------------------------------------------------------------
// Motion vector prediction from already-coded neighbours

namespace detail {

// MV of the neighbouring macroblock's sub-block touching the current
// macroblock's top-left corner, seen from the left (A) or from above (B, C).
inline std::optional<motion_vector> neighbour_mv(const macroblock_record& n, bool from_left) {
  switch (n.partition) {
    case partition_kind::p_skip: return n.mvp;
    case partition_kind::intra: return std::nullopt;
    case partition_kind::p16x16: return n.mvs[0];
    case partition_kind::p16x8: return from_left ? n.mvs[0] : n.mvs[1];
    case partition_kind::p8x16: return from_left ? n.mvs[1] : n.mvs[0];
    case partition_kind::p8x8: return from_left ? n.mvs[1] : n.mvs[2];
  }
  return std::nullopt;
}

}  // namespace detail

// `coded` holds the records of the current frame in raster order, at least up
// to (but excluding) the macroblock at (row, col).
inline motion_vector neighbour_mvp(std::span<const macroblock_record> coded, int row, int col, int cols) {
  auto at = [&](int r, int c) -> const macroblock_record& { return coded[static_cast<std::size_t>(r * cols + c)]; };
  std::optional<motion_vector> a, b, c;
  if (col > 0) a = detail::neighbour_mv(at(row, col - 1), true);
  if (row > 0) b = detail::neighbour_mv(at(row - 1, col), false);
  if (row > 0 && col + 1 < cols) c = detail::neighbour_mv(at(row - 1, col + 1), false);
  return predict_mvp(a, b, c);
}

// ---------------------------------------------------------------------------
// Prediction, residual and reconstruction

using mb_samples = std::array<int, 256>;

inline mb_samples load_macroblock(const plane& p, int mb_x, int mb_y) {
  mb_samples out{};
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) out[y * 16 + x] = p.at(mb_x + x, mb_y + y);
  return out;
}

// Motion-compensated prediction; every displaced sub-block must be inside ref.
inline mb_samples predict_inter(const plane& ref, int mb_x, int mb_y, partition_kind p,
                                std::span<const motion_vector> mvs) {
  mb_samples out{};
  for (int k = 0; k < static_cast<int>(mvs.size()); ++k) {
    const block_rect b = sub_block(p, k, mb_x, mb_y);
    for (int y = 0; y < b.h; ++y)
      for (int x = 0; x < b.w; ++x)
        out[(b.y - mb_y + y) * 16 + (b.x - mb_x + x)] = ref.at(b.x + x + mvs[k].h, b.y + y + mvs[k].v);
  }
  return out;
}

inline std::vector<std::int16_t> code_residual(const mb_samples& cur, const mb_samples& pred, int qp) {
  std::array<int, 256> residual{};
  for (int i = 0; i < 256; ++i) residual[i] = cur[i] - pred[i];
  return transform_quantize(residual, 16, 16, qp);
}

inline void reconstruct_into(plane& out, int mb_x, int mb_y, const mb_samples& pred,
                             std::span<const std::int16_t> coeffs, int qp) {
  const auto residual = dequantize_inverse(coeffs, 16, 16, qp);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      out.at(mb_x + x, mb_y + y) = static_cast<std::uint8_t>(std::clamp(pred[y * 16 + x] + residual[y * 16 + x], 0, 255));
}

// Intra macroblocks code their raw samples against a zero prediction.
inline constexpr mb_samples zero_prediction{};

// True iff the macroblock can be skipped: the MVP-displaced reference block is
// inside the frame and leaves a residual that quantizes to all zeros.
inline bool p_skip_test(const plane& cur, int mb_x, int mb_y, motion_vector mvp, const plane& ref, int qp) {
  if (!displaced_inside(ref, {mb_x, mb_y, 16, 16}, mvp)) return false;
  const motion_vector mv[] = {mvp};
  const auto coeffs = code_residual(load_macroblock(cur, mb_x, mb_y),
                                    predict_inter(ref, mb_x, mb_y, partition_kind::p16x16, mv), qp);
  return all_zero(coeffs);
}

inline int intra_cost(const mb_samples& cur) {
  double mean = 0;
  for (int s : cur) mean += s;
  mean /= 256.0;
  double sad = 0;
  for (int s : cur) sad += std::abs(s - mean);
  return static_cast<int>(std::lround(sad));
}

// ---------------------------------------------------------------------------
// Embedding hook

struct block_id {
  int mb_index = 0;
  int sub_index = 0;
  auto operator<=>(const block_id&) const = default;
};

struct carrier_candidate {
  block_id id;
  motion_vector mv;
  int sad = 0;
};

// Perturbs chosen MVs inside the coding loop. For each P-frame the encoder
// first codes the frame unmodified and offers its non-skip inter MVs to
// select(); the frame is then re-coded, and embed() is called for every
// selected block that still exists, before its residual is formed.
class embedding_hook {
public:
  virtual ~embedding_hook() = default;
  // Written to the stream header. Empty when the hook never modifies anything.
  virtual std::string descriptor() const = 0;
  virtual std::vector<block_id> select(int frame_index, std::span<const carrier_candidate> candidates) = 0;
  virtual motion_vector embed(int frame_index, block_id id, motion_vector mv,
                              const std::function<bool(motion_vector)>& admissible) = 0;
};

// ---------------------------------------------------------------------------
// Encoder

namespace detail {

struct coded_p_frame {
  coded_frame frame;
  plane recon;
  std::vector<carrier_candidate> candidates;
};

struct inter_choice {
  partition_kind partition = partition_kind::p16x16;
  std::vector<motion_vector> mvs;
  std::vector<int> sads;
  double cost = 0;
};

inline inter_choice choose_partition(const plane& cur, const plane& ref, int mb_x, int mb_y, motion_vector mvp,
                                     const encoder_config& cfg) {
  const double lm = lambda_motion(cfg.qp), lmode = lambda_mode(cfg.qp);
  inter_choice best;
  bool have = false;
  for (auto p : inter_partitions) {
    inter_choice c{p, {}, {}, 0};
    int sad = 0, bits = partition_header_bits(p);
    for (int k = 0; k < sub_block_count(p); ++k) {
      const auto r = motion_estimate(cur, ref, sub_block(p, k, mb_x, mb_y), mvp, cfg.search_range, cfg.strategy, lm);
      c.mvs.push_back(r.mv);
      c.sads.push_back(r.sad);
      sad += r.sad;
      bits += mvd_bits(compute_mvd(r.mv, mvp));
    }
    c.cost = sad + lmode * bits;
    if (!have || c.cost < best.cost) {
      best = std::move(c);
      have = true;
    }
  }
  return best;
}

inline coded_p_frame code_p_frame(const plane& cur, const plane& ref, int frame_index, const encoder_config& cfg,
                                  embedding_hook* hook, const std::set<block_id>* carriers) {
  const int cols = cur.width / 16, rows = cur.height / 16;
  coded_p_frame out{{frame_type::p, {}}, plane(cur.width, cur.height), {}};
  std::vector<macroblock_record> records;
  records.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int mb_x = c * 16, mb_y = r * 16, mb_index = r * cols + c;
      coded_macroblock mb;
      auto& rec = mb.record;
      rec.frame_index = frame_index;
      rec.mb_row = r;
      rec.mb_col = c;
      rec.mvp = neighbour_mvp(records, r, c, cols);
      const mb_samples samples = load_macroblock(cur, mb_x, mb_y);

      if (p_skip_test(cur, mb_x, mb_y, rec.mvp, ref, cfg.qp)) {
        rec.partition = partition_kind::p_skip;
        const motion_vector mv[] = {rec.mvp};
        reconstruct_into(out.recon, mb_x, mb_y, predict_inter(ref, mb_x, mb_y, partition_kind::p16x16, mv),
                         std::vector<std::int16_t>(256, 0), cfg.qp);
      } else {
        auto choice = choose_partition(cur, ref, mb_x, mb_y, rec.mvp, cfg);
        if (intra_cost(samples) < choice.cost) {
          rec.partition = partition_kind::intra;
          mb.coeffs = code_residual(samples, zero_prediction, cfg.qp);
          reconstruct_into(out.recon, mb_x, mb_y, zero_prediction, mb.coeffs, cfg.qp);
        } else {
          rec.partition = choice.partition;
          for (int k = 0; k < static_cast<int>(choice.mvs.size()); ++k) {
            const block_id id{mb_index, k};
            out.candidates.push_back({id, choice.mvs[k], choice.sads[k]});
            if (hook && carriers && carriers->contains(id)) {
              const block_rect b = sub_block(choice.partition, k, mb_x, mb_y);
              auto admissible = [&](motion_vector mv) {
                return std::abs(mv.h) <= cfg.search_range && std::abs(mv.v) <= cfg.search_range &&
                       displaced_inside(ref, b, mv);
              };
              choice.mvs[k] = hook->embed(frame_index, id, choice.mvs[k], admissible);
            }
          }
          rec.mvs = choice.mvs;
          const auto pred = predict_inter(ref, mb_x, mb_y, rec.partition, rec.mvs);
          mb.coeffs = code_residual(samples, pred, cfg.qp);
          reconstruct_into(out.recon, mb_x, mb_y, pred, mb.coeffs, cfg.qp);
        }
      }
      rec.all_coeffs_zero = all_zero(mb.coeffs);
      records.push_back(rec);
      out.frame.macroblocks.push_back(std::move(mb));
    }
  }
  return out;
}

inline coded_frame code_i_frame(const plane& cur, plane& recon, int frame_index, int qp) {
  const int cols = cur.width / 16, rows = cur.height / 16;
  coded_frame f{frame_type::i, {}};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      coded_macroblock mb;
      mb.record = {frame_index, r, c, partition_kind::intra, {}, {}, true};
      mb.coeffs = code_residual(load_macroblock(cur, c * 16, r * 16), zero_prediction, qp);
      mb.record.all_coeffs_zero = all_zero(mb.coeffs);
      reconstruct_into(recon, c * 16, r * 16, zero_prediction, mb.coeffs, qp);
      f.macroblocks.push_back(std::move(mb));
    }
  }
  return f;
}

inline video_sequence luma_only_sequence(int width, int height, std::vector<plane> lumas) {
  video_sequence seq{width, height, {}};
  for (auto& l : lumas) {
    yuv_frame f = make_frame(width, height);
    f.luma = std::move(l);
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace detail

struct encode_result {
  encoded_stream stream;
  // The encoder's closed-loop reconstruction (luma; chroma is mid-grey).
  video_sequence reconstruction;
};

inline void validate_config(const encoder_config& cfg) {
  detail::check_qp(cfg.qp);
  if (cfg.gop_size < 1 || cfg.gop_size > 255) throw invalid_argument("gop size must be in [1,255]");
  if (cfg.search_range < 0) throw invalid_argument("search range must be non-negative");
}

inline encode_result encode_with_reconstruction(const video_sequence& video, const encoder_config& cfg,
                                                embedding_hook* hook = nullptr) {
  validate_config(cfg);
  if (video.frames.empty()) throw empty_video("cannot encode a sequence without frames");
  if (!macroblock_aligned(video.width, video.height)) {
    throw dimension_not_aligned("video dimensions must be multiples of 16");
  }
  encode_result out;
  auto& h = out.stream.header;
  h.width = video.width;
  h.height = video.height;
  h.n_frames = static_cast<std::uint32_t>(video.frames.size());
  h.qp = cfg.qp;
  h.gop_size = cfg.gop_size;
  h.embedder = hook ? hook->descriptor() : std::string{};
  h.seed = cfg.seed;

  std::vector<plane> recon;
  recon.reserve(video.frames.size());
  for (std::size_t t = 0; t < video.frames.size(); ++t) {
    const plane& cur = video.frames[t].luma;
    const int fi = static_cast<int>(t);
    if (is_i_frame(t, cfg.gop_size)) {
      plane r(video.width, video.height);
      out.stream.frames.push_back(detail::code_i_frame(cur, r, fi, cfg.qp));
      recon.push_back(std::move(r));
      continue;
    }
    const plane& ref = recon.back();
    auto coded = detail::code_p_frame(cur, ref, fi, cfg, nullptr, nullptr);
    if (hook) {
      const auto selected = hook->select(fi, coded.candidates);
      if (!selected.empty()) {
        const std::set<block_id> carriers(selected.begin(), selected.end());
        coded = detail::code_p_frame(cur, ref, fi, cfg, hook, &carriers);
      }
    }
    out.stream.frames.push_back(std::move(coded.frame));
    recon.push_back(std::move(coded.recon));
  }
  out.reconstruction = detail::luma_only_sequence(video.width, video.height, std::move(recon));
  return out;
}

inline encoded_stream encode_sequence(const video_sequence& video, const encoder_config& cfg,
                                      embedding_hook* hook = nullptr) {
  return encode_with_reconstruction(video, cfg, hook).stream;
}

// ---------------------------------------------------------------------------
// Decoder

struct decode_result {
  video_sequence video;
  // Every macroblock of every frame, frame-major then raster order.
  std::vector<macroblock_record> records;
};

inline decode_result decode_sequence(const encoded_stream& s) {
  const auto& h = s.header;
  auto fail = [](const std::string& what) { throw malformed_stream(what); };
  if (!macroblock_aligned(h.width, h.height)) fail("dimensions are not positive multiples of 16");
  if (h.qp < min_qp || h.qp > max_qp) fail("qp out of range");
  if (h.gop_size < 1) fail("gop size must be positive");
  if (s.frames.size() != h.n_frames) fail("header frame count does not match payload");
  const int cols = s.mb_cols(), rows = s.mb_rows();
  const std::size_t per_frame = static_cast<std::size_t>(rows * cols);

  decode_result out;
  std::vector<plane> recon;
  for (std::size_t t = 0; t < s.frames.size(); ++t) {
    const auto& f = s.frames[t];
    const std::string where = "frame " + std::to_string(t);
    const bool expect_i = is_i_frame(t, h.gop_size);
    if ((f.type == frame_type::i) != expect_i) fail(where + ": frame type disagrees with the GOP structure");
    if (f.macroblocks.size() != per_frame) fail(where + ": wrong macroblock count");
    plane r(h.width, h.height);
    std::vector<macroblock_record> records;
    records.reserve(per_frame);
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col < cols; ++col) {
        const auto& mb = f.macroblocks[static_cast<std::size_t>(row * cols + col)];
        macroblock_record rec = mb.record;
        rec.frame_index = static_cast<int>(t);
        rec.mb_row = row;
        rec.mb_col = col;
        rec.all_coeffs_zero = all_zero(mb.coeffs);
        const std::string at = where + " mb (" + std::to_string(row) + "," + std::to_string(col) + ")";
        const int mb_x = col * 16, mb_y = row * 16;
        if (static_cast<int>(rec.mvs.size()) != sub_block_count(rec.partition)) fail(at + ": mv count mismatch");
        const motion_vector mvp = expect_i ? motion_vector{} : neighbour_mvp(records, row, col, cols);
        if (!(rec.mvp == mvp)) fail(at + ": recorded MVP disagrees with the neighbour median");
        if (expect_i && rec.partition != partition_kind::intra) fail(at + ": inter macroblock in an I-frame");

        if (rec.partition == partition_kind::p_skip) {
          if (!mb.coeffs.empty()) fail(at + ": skipped macroblock carries coefficients");
          if (!displaced_inside(recon.back(), {mb_x, mb_y, 16, 16}, mvp)) fail(at + ": skip MV leaves the frame");
          const motion_vector mv[] = {mvp};
          const auto pred = predict_inter(recon.back(), mb_x, mb_y, partition_kind::p16x16, mv);
          for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) r.at(mb_x + x, mb_y + y) = static_cast<std::uint8_t>(pred[y * 16 + x]);
        } else {
          if (mb.coeffs.size() != 256) fail(at + ": expected 256 coefficients");
          if (rec.partition == partition_kind::intra) {
            reconstruct_into(r, mb_x, mb_y, zero_prediction, mb.coeffs, h.qp);
          } else {
            for (int k = 0; k < static_cast<int>(rec.mvs.size()); ++k) {
              if (!displaced_inside(recon.back(), sub_block(rec.partition, k, mb_x, mb_y), rec.mvs[k])) {
                fail(at + ": MV points outside the reference frame");
              }
            }
            reconstruct_into(r, mb_x, mb_y, predict_inter(recon.back(), mb_x, mb_y, rec.partition, rec.mvs),
                             mb.coeffs, h.qp);
          }
        }
        records.push_back(std::move(rec));
      }
    }
    out.records.insert(out.records.end(), records.begin(), records.end());
    recon.push_back(std::move(r));
  }
  out.video = detail::luma_only_sequence(h.width, h.height, std::move(recon));
  return out;
}

// Fraction of P-frame macroblocks coded as PSkip.
inline double skip_fraction(const encoded_stream& s) {
  std::size_t skips = 0, total = 0;
  for (const auto& f : s.frames) {
    if (f.type != frame_type::p) continue;
    for (const auto& mb : f.macroblocks) {
      ++total;
      skips += mb.record.partition == partition_kind::p_skip;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(skips) / static_cast<double>(total);
}

}  // namespace mvsteg
