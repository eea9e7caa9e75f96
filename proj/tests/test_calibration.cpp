#include <gtest/gtest.h>

#include "support.hpp"

using namespace mvsteg;
using mvsteg::testing::black_video;
using mvsteg::testing::busy_video;

TEST(Calibration, AllStaticSequenceStaysSkipped) {
  for (int qp : {5, 25, 45}) {
    const auto s = encode_sequence(black_video(64, 48, 7), {qp, 6, 8, search_strategy::hexagon, 0});
    const auto cal = calibrate(s);
    ASSERT_EQ(cal.pairs.size(), 5u * 12);
    for (const auto& p : cal.pairs) {
      EXPECT_EQ(p.first.partition, partition_kind::p_skip);
      EXPECT_EQ(p.second.partition, partition_kind::p_skip);
      EXPECT_EQ(mvp_diff(p.first.mvp, p.second.mvp), 0);
    }
    EXPECT_DOUBLE_EQ(retained_skip_fraction(cal), 1.0);
  }
}

TEST(Calibration, PairCountArithmetic) {
  const auto s = encode_sequence(busy_video(64, 64, 6, 3), {25, 6, 8, search_strategy::hexagon, 0});
  const auto cal = calibrate(s);
  EXPECT_EQ(cal.pairs.size(), 80u);
  EXPECT_EQ(cal.p_frame_count(), 5u);
  EXPECT_EQ(cal.mbs_per_frame, 16);
  // Every P-frame macroblock appears exactly once, in grid order.
  for (std::size_t i = 0; i < cal.pairs.size(); ++i) {
    const auto& p = cal.pairs[i];
    EXPECT_EQ(p.frame_index, static_cast<int>(1 + i / 16));
    EXPECT_EQ(p.mb_row * 4 + p.mb_col, static_cast<int>(i % 16));
    EXPECT_EQ(p.first.frame_index, p.second.frame_index);
    EXPECT_EQ(p.first.mb_row, p.second.mb_row);
    EXPECT_EQ(p.first.mb_col, p.second.mb_col);
  }
}

TEST(Calibration, IFramesAreExcluded) {
  const auto s = encode_sequence(busy_video(64, 48, 13, 3), {25, 4, 8, search_strategy::hexagon, 0});
  const auto cal = calibrate(s);
  EXPECT_EQ(cal.pairs.size(), 9u * 12);
  for (const auto& p : cal.pairs) EXPECT_NE(p.frame_index % 4, 0);
}

TEST(Calibration, QpOverride) {
  const auto s = encode_sequence(busy_video(64, 48, 6, 3), {25, 6, 8, search_strategy::hexagon, 0});
  const auto r = calibrate_detailed(s, 28);
  EXPECT_EQ(r.sequence.qp_first, 25);
  EXPECT_EQ(r.sequence.qp_second, 28);
  EXPECT_EQ(r.recompressed.header.qp, 28);
  EXPECT_EQ(r.recompressed.header.gop_size, 6);
  EXPECT_THROW(calibrate(s, 60), invalid_qp);
}

TEST(Calibration, MatchedOverrideEqualsDefaultPath) {
  const auto s = encode_sequence(busy_video(64, 48, 6, 4), {27, 6, 8, search_strategy::hexagon, 0});
  EXPECT_EQ(serialize(calibrate_detailed(s, 27).recompressed), serialize(calibrate_detailed(s).recompressed));
}

TEST(Calibration, RecompressionNeverEmbeds) {
  const auto v = busy_video(64, 48, 6, 4);
  const auto stego = embed_sequence(v, {25, 6, 8, search_strategy::hexagon, 0},
                                    {embedding_method::lsb_match_random, 0.5, 3});
  ASSERT_FALSE(stego.header.embedder.empty());
  EXPECT_TRUE(calibrate_detailed(stego).recompressed.header.embedder.empty());
}

TEST(Calibration, NoSkipBlocks) {
  calibrated_sequence c;
  c.mbs_per_frame = 1;
  macroblock_record r;
  r.partition = partition_kind::p16x16;
  r.mvs = {{1, 0}};
  c.pairs.push_back({1, 0, 0, r, r});
  EXPECT_THROW(retained_skip_fraction(c), no_skip_blocks);
  c.pairs.clear();
  EXPECT_THROW(retained_skip_fraction(c), no_skip_blocks);
}

TEST(Calibration, RetainedSkipOnCoverCorpus) {
  experiment_config cfg;
  cfg.corpus.count = 3;
  cfg.corpus.width = 176;
  cfg.corpus.height = 144;
  cfg.corpus.frames = 21;
  cfg.corpus.objects = 20;
  for (int i = 0; i < 3; ++i) {
    const auto item = corpus_entry(cfg.corpus, i);
    const auto s = encode_sequence(generate_corpus_video(cfg.corpus, i), encoder_for(cfg, 25));
    EXPECT_GE(retained_skip_fraction(calibrate(s)), 0.9) << item.id;
  }
}

TEST(Calibration, MalformedStreamPropagates) {
  auto s = encode_sequence(busy_video(64, 48, 3, 4), {25, 6, 8, search_strategy::hexagon, 0});
  s.frames[1].type = frame_type::i;
  EXPECT_THROW(calibrate(s), malformed_stream);
}

TEST(Calibration, RecalibrationConvergesOnStego) {
  experiment_config cfg;
  cfg.corpus.count = 4;
  cfg.corpus.width = 176;
  cfg.corpus.height = 144;
  cfg.corpus.frames = 21;
  cfg.corpus.objects = 20;
  auto zero_mass = [](const calibrated_sequence& c) {
    std::size_t k = 0;
    for (const auto& p : c.pairs)
      k += p.first.partition == partition_kind::p_skip && p.second.partition == partition_kind::p_skip &&
           mvp_diff(p.first.mvp, p.second.mvp) == 0;
    return static_cast<double>(k) / static_cast<double>(c.pairs.size());
  };
  for (int i = 0; i < 4; ++i) {
    const auto stego = embed_sequence(generate_corpus_video(cfg.corpus, i), encoder_for(cfg, 25), plan_for(cfg, 0.2, i));
    const auto once = calibrate_detailed(stego);
    const auto twice = calibrate(once.recompressed);
    EXPECT_GE(zero_mass(twice), zero_mass(once.sequence)) << i;
  }
}
