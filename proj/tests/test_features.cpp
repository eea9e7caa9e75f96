#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "support.hpp"

using namespace mvsteg;
using mvsteg::testing::naive_features;
using mvsteg::testing::random_calibrated;

namespace {

calibrated_block_pair pair_of(partition_kind first, partition_kind second, motion_vector mvp1 = {},
                              motion_vector mvp2 = {}) {
  calibrated_block_pair p;
  p.first.partition = first;
  p.second.partition = second;
  p.first.mvp = mvp1;
  p.second.mvp = mvp2;
  return p;
}

constexpr auto skip = partition_kind::p_skip;

}  // namespace

TEST(MvpDiff, Examples) {
  EXPECT_EQ(mvp_diff({1, 2}, {1, 2}), 0);
  EXPECT_EQ(mvp_diff({1, 2}, {2, 3}), 2);
  EXPECT_EQ(mvp_diff({14, 7}, {13, 6}), 2);
  EXPECT_EQ(mvp_diff({-3, 0}, {2, -1}), 6);
}

TEST(F1, CountingExample) {
  std::vector<calibrated_block_pair> w;
  for (int d : {0, 0, 0, 1, 2}) w.push_back(pair_of(skip, skip, {d, 0}, {0, 0}));
  w.push_back(pair_of(partition_kind::p16x16, skip, {9, 9}));
  w.push_back(pair_of(skip, partition_kind::intra, {9, 9}));
  const auto [f1, n] = extract_f1(w);
  EXPECT_EQ(n, 5);
  const std::array<double, 5> expect{0.6, 0.2, 0.2, 0, 0};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(f1[i], expect[i], 1e-12);
}

TEST(F1, LargeDiffsShareLastBin) {
  std::vector<calibrated_block_pair> w{pair_of(skip, skip, {5, 0}), pair_of(skip, skip, {3, -4})};
  const auto [f1, n] = extract_f1(w);
  EXPECT_EQ(n, 2);
  EXPECT_EQ(f1, (std::array<double, 5>{0, 0, 0, 0, 1}));
}

TEST(F1, EmptyWindow) {
  std::vector<calibrated_block_pair> w{pair_of(partition_kind::p16x16, skip)};
  const auto [f1, n] = extract_f1(w);
  EXPECT_EQ(n, 0);
  EXPECT_EQ(f1, (std::array<double, 5>{}));
}

TEST(F2, CountingExample) {
  std::vector<calibrated_block_pair> w;
  for (auto p : {skip, skip, partition_kind::p16x16, partition_kind::p16x8, partition_kind::p8x16,
                 partition_kind::intra})
    w.push_back(pair_of(p, skip));
  w.push_back(pair_of(skip, partition_kind::p8x8));
  const auto [f2, m] = extract_f2(w);
  EXPECT_EQ(m, 6);
  const std::array<double, 6> expect{1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 6, 0, 1.0 / 6};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(f2[i], expect[i], 1e-12);
  const auto [z, m0] = extract_f2(std::span<const calibrated_block_pair>{});
  EXPECT_EQ(m0, 0);
  EXPECT_EQ(z, (std::array<double, 6>{}));
}

TEST(Windows, Counts) {
  rng g(1);
  EXPECT_EQ(extract_smcf(random_calibrated(g, 5, 4), 5, window_mode::non_overlapping).size(), 1u);
  const auto c12 = random_calibrated(g, 12, 4);
  EXPECT_EQ(extract_smcf(c12, 5, window_mode::non_overlapping).size(), 2u);
  EXPECT_EQ(extract_smcf(c12, 5, window_mode::sliding).size(), 8u);
  EXPECT_TRUE(extract_smcf(random_calibrated(g, 4, 4), 5).empty());
  EXPECT_THROW(extract_smcf(c12, 0), invalid_argument);
  EXPECT_EQ(window_starts(12, 5, window_mode::non_overlapping), (std::vector<std::size_t>{0, 5}));
}

TEST(Smcf, AllStaticSequence) {
  const auto s = encode_sequence(mvsteg::testing::black_video(64, 48, 6), {25, 6, 8, search_strategy::hexagon, 0});
  const auto v = extract_smcf(calibrate(s), 5);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].f, (feature_array{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(v[0].n_f1, 60);
  EXPECT_EQ(v[0].m_f2, 60);
}

TEST(Smcf, MatchesNaiveCounter) {
  rng g(2024);
  for (int it = 0; it < 100; ++it) {
    const int frames = g.between(1, 14), mbs = g.between(1, 12), len = g.between(1, 6);
    const auto mode = it % 2 ? window_mode::sliding : window_mode::non_overlapping;
    const auto c = random_calibrated(g, frames, mbs);
    const auto v = extract_smcf(c, len, mode);
    const auto starts = window_starts(frames, len, mode);
    ASSERT_EQ(v.size(), starts.size());
    for (std::size_t w = 0; w < v.size(); ++w) {
      EXPECT_EQ(v[w].window_id, static_cast<int>(w));
      EXPECT_EQ(v[w].f, naive_features(c, starts[w], len)) << it << "/" << w;
    }
  }
}

TEST(Smcf, Normalization) {
  rng g(7);
  for (int it = 0; it < 300; ++it) {
    const auto c = random_calibrated(g, g.between(5, 12), g.between(1, 10));
    for (const auto& v : extract_smcf(c, 5, window_mode::sliding)) {
      const double s1 = std::accumulate(v.f.begin(), v.f.begin() + 5, 0.0);
      const double s2 = std::accumulate(v.f.begin() + 5, v.f.end(), 0.0);
      EXPECT_NEAR(s1, v.n_f1 > 0 ? 1.0 : 0.0, 1e-9);
      EXPECT_NEAR(s2, v.m_f2 > 0 ? 1.0 : 0.0, 1e-9);
      for (double x : v.f) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
    }
  }
}

TEST(Smcf, RepeatableOnCoverStream) {
  const auto s = encode_sequence(mvsteg::testing::busy_video(96, 64, 11, 5), {25, 11, 8, search_strategy::hexagon, 0});
  const auto a = extract_smcf(calibrate(s), 5);
  const auto b = extract_smcf(calibrate(s), 5);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].f, b[i].f);
}

TEST(FeatureCsv, RoundTrip) {
  rng g(3);
  std::vector<feature_row> rows;
  for (int i = 0; i < 6; ++i) {
    const auto c = random_calibrated(g, 5, 7);
    rows.push_back({"seq" + std::to_string(i), i % 2 ? label::stego : label::cover, extract_smcf(c, 5)[0]});
  }
  std::stringstream ss;
  write_feature_csv(ss, rows);
  const auto back = read_feature_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].sequence_id, rows[i].sequence_id);
    EXPECT_EQ(back[i].lbl, rows[i].lbl);
    EXPECT_EQ(back[i].features.f, rows[i].features.f);
    EXPECT_EQ(back[i].features.n_f1, rows[i].features.n_f1);
    EXPECT_EQ(back[i].features.m_f2, rows[i].features.m_f2);
  }
}

TEST(FeatureCsv, RejectsBadInput) {
  std::stringstream none("a,b\n");
  EXPECT_THROW(read_feature_csv(none), invalid_argument);
  std::stringstream bad(feature_csv_header() + "\nseq,0,maybe,1,1,0,0,0,0,0,0,0,0,0,0,0\n");
  EXPECT_THROW(read_feature_csv(bad), invalid_argument);
  std::stringstream short_line(feature_csv_header() + "\nseq,0,cover,1\n");
  EXPECT_THROW(read_feature_csv(short_line), invalid_argument);
}
