#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mvsteg/codec.hpp"
#include "mvsteg/error.hpp"
#include "mvsteg/random.hpp"

namespace mvsteg {

enum class embedding_method { lsb_match_random, magnitude_selective };

inline std::string_view to_string(embedding_method m) {
  return m == embedding_method::lsb_match_random ? "lsb-match-random" : "magnitude-selective";
}

inline std::optional<embedding_method> parse_embedding_method(std::string_view s) {
  if (s == "lsb-match-random") return embedding_method::lsb_match_random;
  if (s == "magnitude-selective") return embedding_method::magnitude_selective;
  return std::nullopt;
}

// What to embed and how much: `rate` is in bits per non-skip motion vector.
struct embedding_plan {
  embedding_method method = embedding_method::lsb_match_random;
  double rate = 0.0;
  std::uint64_t seed = 0;

  std::string descriptor() const {
    std::ostringstream os;
    os << "method=" << to_string(method) << ";rate=" << rate << ";seed=" << seed;
    return os.str();
  }
};

inline int mv_parity(motion_vector mv) { return (mv.h + mv.v) & 1; }

// LSB matching on the parity of h+v: if the parity differs from `bit`, one
// component moves by +-1. The component and sign are drawn from `gen`; when
// that candidate is not admissible the opposite sign, then the other
// component, are tried. Returns mv unchanged if no candidate is admissible.
inline motion_vector embed_mv(motion_vector mv, int bit, rng& gen,
                              const std::function<bool(motion_vector)>& admissible = {}) {
  if (mv_parity(mv) == (bit & 1)) return mv;
  const bool horizontal_first = gen.coin();
  const int sign = gen.coin() ? 1 : -1;
  const motion_vector order[] = {
      horizontal_first ? motion_vector{mv.h + sign, mv.v} : motion_vector{mv.h, mv.v + sign},
      horizontal_first ? motion_vector{mv.h - sign, mv.v} : motion_vector{mv.h, mv.v - sign},
      horizontal_first ? motion_vector{mv.h, mv.v + sign} : motion_vector{mv.h + sign, mv.v},
      horizontal_first ? motion_vector{mv.h, mv.v - sign} : motion_vector{mv.h - sign, mv.v},
  };
  for (const auto& c : order) {
    if (!admissible || admissible(c)) return c;
  }
  return mv;
}

inline std::size_t carrier_count(double rate, std::size_t available) {
  if (!(rate >= 0.0)) throw invalid_argument("embedding rate must be non-negative");
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(available)));
}

// Chooses round(rate * |candidates|) carrier blocks, returned in block order.
inline std::vector<block_id> select_carriers(std::span<const carrier_candidate> candidates,
                                             const embedding_plan& plan, rng& gen) {
  const std::size_t k = carrier_count(plan.rate, candidates.size());
  if (k > candidates.size()) {
    throw rate_too_high("rate " + std::to_string(plan.rate) + " asks for " + std::to_string(k) + " carriers but only " +
                        std::to_string(candidates.size()) + " motion vectors are available");
  }
  std::vector<block_id> out;
  if (k == 0) return out;
  std::vector<carrier_candidate> pool(candidates.begin(), candidates.end());
  if (plan.method == embedding_method::magnitude_selective) {
    std::stable_sort(pool.begin(), pool.end(), [](const carrier_candidate& a, const carrier_candidate& b) {
      const int ma = std::abs(a.mv.h) + std::abs(a.mv.v), mb = std::abs(b.mv.h) + std::abs(b.mv.v);
      return ma != mb ? ma > mb : a.id < b.id;
    });
  } else {
    // Partial Fisher-Yates: the first k slots become a uniform sample.
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + gen.below(pool.size() - i)]);
  }
  for (std::size_t i = 0; i < k; ++i) out.push_back(pool[i].id);
  std::sort(out.begin(), out.end());
  return out;
}

// One embedded bit, for auditing.
struct embedding_event {
  int frame_index = 0;
  block_id id;
  int bit = 0;
  motion_vector before;
  motion_vector after;
};

// In-loop embedder driving the encoder's embedding hook. Selection and
// payload randomness are derived per frame from the plan seed, so a frame's
// choices do not depend on how many draws earlier frames consumed.
class mv_embedder final : public embedding_hook {
public:
  explicit mv_embedder(embedding_plan plan) : plan_(plan), payload_(0) {
    if (!(plan.rate >= 0.0)) throw invalid_argument("embedding rate must be non-negative");
  }

  std::string descriptor() const override { return plan_.rate == 0.0 ? std::string{} : plan_.descriptor(); }

  std::vector<block_id> select(int frame_index, std::span<const carrier_candidate> candidates) override {
    rng selection(derive_seed(plan_.seed, 2 * static_cast<std::uint64_t>(frame_index)));
    payload_ = rng(derive_seed(plan_.seed, 2 * static_cast<std::uint64_t>(frame_index) + 1));
    auto carriers = select_carriers(candidates, plan_, selection);
    carriers_offered_ += carriers.size();
    return carriers;
  }

  motion_vector embed(int frame_index, block_id id, motion_vector mv,
                      const std::function<bool(motion_vector)>& admissible) override {
    const int bit = static_cast<int>(payload_.below(2));
    const motion_vector out = embed_mv(mv, bit, payload_, admissible);
    events_.push_back({frame_index, id, bit, mv, out});
    return out;
  }

  const embedding_plan& plan() const { return plan_; }
  // Bits actually embedded (carriers that survived re-coding of their frame).
  const std::vector<embedding_event>& events() const { return events_; }
  std::size_t carriers_offered() const { return carriers_offered_; }

private:
  embedding_plan plan_;
  rng payload_;
  std::vector<embedding_event> events_;
  std::size_t carriers_offered_ = 0;
};

inline encoded_stream embed_sequence(const video_sequence& video, const encoder_config& cfg,
                                     const embedding_plan& plan) {
  mv_embedder hook(plan);
  return encode_sequence(video, cfg, &hook);
}

}  // namespace mvsteg
