#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace mvsteg;
using mvsteg::testing::temp_dir;

TEST(ReadYuv, SixFramesOf64x64) {
  const std::vector<std::uint8_t> bytes(36864, 0);
  const auto seq = parse_yuv(bytes, 64, 64);
  EXPECT_EQ(seq.frames.size(), 6u);
  EXPECT_EQ(seq.width, 64);
  EXPECT_EQ(seq.height, 64);
}

TEST(ReadYuv, TruncatedFile) {
  const std::vector<std::uint8_t> bytes(100, 0);
  EXPECT_THROW(parse_yuv(bytes, 64, 64), truncated_file);
}

TEST(ReadYuv, AllZeroFileGivesBlackFrames) {
  const std::vector<std::uint8_t> bytes(frame_bytes(32, 16) * 3, 0);
  const auto seq = parse_yuv(bytes, 32, 16);
  ASSERT_EQ(seq.frames.size(), 3u);
  for (const auto& f : seq.frames) {
    for (auto s : f.luma.samples) EXPECT_EQ(s, 0);
    for (auto s : f.cb.samples) EXPECT_EQ(s, 0);
    for (auto s : f.cr.samples) EXPECT_EQ(s, 0);
  }
}

TEST(ReadYuv, PlanarLayoutLumaFirst) {
  std::vector<std::uint8_t> bytes(frame_bytes(16, 16));
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(i < 256 ? 1 : i < 320 ? 2 : 3);
  const auto seq = parse_yuv(bytes, 16, 16);
  EXPECT_EQ(seq.frames[0].luma.at(15, 15), 1);
  EXPECT_EQ(seq.frames[0].cb.at(7, 7), 2);
  EXPECT_EQ(seq.frames[0].cr.at(0, 0), 3);
}

TEST(ReadYuv, UnalignedRejectedUnlessPadding) {
  std::vector<std::uint8_t> bytes(frame_bytes(20, 18) * 2);
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(i * 7);
  EXPECT_THROW(parse_yuv(bytes, 20, 18), dimension_not_aligned);
  const auto padded = parse_yuv(bytes, 20, 18, padding::replicate);
  EXPECT_EQ(padded.width, 32);
  EXPECT_EQ(padded.height, 32);
  // Right and bottom edges replicate the last real column/row.
  const std::uint8_t corner = bytes[static_cast<std::size_t>(17 * 20 + 19)];
  EXPECT_EQ(padded.frames[0].luma.at(31, 31), corner);
  EXPECT_EQ(padded.frames[0].luma.at(25, 3), bytes[3 * 20 + 19]);
  EXPECT_EQ(padded.frames[0].luma.at(4, 30), bytes[17 * 20 + 4]);
  EXPECT_EQ(padded.frames[0].cb.width, 16);
}

TEST(ReadYuv, WriteReadRoundTrip) {
  temp_dir dir("yuv_roundtrip");
  const auto seq = mvsteg::testing::busy_video(48, 32, 4, 5);
  const auto path = dir.path() / "a.yuv";
  write_yuv(path, seq);
  EXPECT_EQ(std::filesystem::file_size(path), frame_bytes(48, 32) * 4);
  EXPECT_EQ(read_yuv(path, 48, 32), seq);
}

TEST(ReadYuv, MissingFileIsIoError) { EXPECT_THROW(read_yuv("/nonexistent/x.yuv", 16, 16), io_error); }

TEST(Synthetic, DeterministicForFixedSeed) {
  synthetic_params p;
  p.pan_h = 1;
  p.pan_v = 0;
  EXPECT_EQ(generate_synthetic(64, 64, 6, p, 7), generate_synthetic(64, 64, 6, p, 7));
  EXPECT_NE(generate_synthetic(64, 64, 6, p, 7), generate_synthetic(64, 64, 6, p, 8));
  p.model = motion_model::multi_object;
  EXPECT_EQ(generate_synthetic(64, 64, 6, p, 7), generate_synthetic(64, 64, 6, p, 7));
  p.model = motion_model::static_noise;
  EXPECT_EQ(generate_synthetic(64, 64, 6, p, 7), generate_synthetic(64, 64, 6, p, 7));
}

TEST(Synthetic, StaticWithoutNoiseHasIdenticalFrames) {
  const auto v = mvsteg::testing::static_video(64, 48, 5, 0);
  for (std::size_t t = 1; t < v.frames.size(); ++t) EXPECT_EQ(v.frames[t], v.frames[0]);
}

TEST(Synthetic, StaticNoiseVariesFramesSlightly) {
  const auto v = mvsteg::testing::static_video(64, 48, 3, 2);
  EXPECT_NE(v.frames[1].luma, v.frames[0].luma);
  for (std::size_t i = 0; i < v.frames[0].luma.samples.size(); ++i)
    EXPECT_LE(std::abs(v.frames[1].luma.samples[i] - v.frames[0].luma.samples[i]), 4);
}

TEST(Synthetic, GlobalPanMatchesShiftedPreviousFrame) {
  const auto v = mvsteg::testing::pan_video(64, 64, 6, 2, 0, 11);
  for (std::size_t t = 0; t + 1 < v.frames.size(); ++t) {
    int max_diff = 0;
    for (int y = 0; y < 64; ++y)
      for (int x = 2; x < 64; ++x)
        max_diff = std::max(max_diff, std::abs(v.frames[t + 1].luma.at(x, y) - v.frames[t].luma.at(x - 2, y)));
    EXPECT_EQ(max_diff, 0) << "frame " << t;
  }
}

TEST(Synthetic, TextureIsNotFlat) {
  const auto v = mvsteg::testing::pan_video(64, 64, 2, 1, 0, 3);
  std::set<int> values(v.frames[0].luma.samples.begin(), v.frames[0].luma.samples.end());
  EXPECT_GT(values.size(), 20u);
}

TEST(Synthetic, MultiObjectMovesAgainstBackground) {
  synthetic_params p;
  p.model = motion_model::multi_object;
  p.pan_h = 0;
  p.pan_v = 0;
  const auto v = generate_synthetic(96, 64, 3, p, 4);
  EXPECT_NE(v.frames[1].luma, v.frames[0].luma);
  p.object_count = 2;
  EXPECT_THROW(generate_synthetic(96, 64, 3, p, 4), invalid_argument);
}

TEST(Synthetic, WholePelObjectVelocities) {
  // Speed limit of one pel with whole-pel steps leaves 8 distinct non-zero velocities.
  synthetic_params p;
  p.model = motion_model::multi_object;
  p.pan_h = 0;
  p.pan_v = 0;
  p.noise_amplitude = 0;
  p.object_count = 3;
  p.min_object_size = 16;
  p.max_object_size = 16;
  p.max_object_speed16 = 16;
  p.velocity_step16 = 16;
  EXPECT_NO_THROW(generate_synthetic(64, 64, 3, p, 2));
  p.object_count = 9;
  EXPECT_THROW(generate_synthetic(64, 64, 3, p, 2), invalid_argument);
}

TEST(Synthetic, Preconditions) {
  synthetic_params p;
  EXPECT_THROW(generate_synthetic(64, 64, 1, p, 1), invalid_argument);
  EXPECT_THROW(generate_synthetic(0, 64, 4, p, 1), invalid_argument);
  p.noise_amplitude = -1;
  EXPECT_THROW(generate_synthetic(64, 64, 4, p, 1), invalid_argument);
}

TEST(Synthetic, ChromaIsHalfResolution) {
  const auto v = mvsteg::testing::pan_video(64, 32, 2, 1, 0);
  EXPECT_EQ(v.frames[0].cb.width, 32);
  EXPECT_EQ(v.frames[0].cr.height, 16);
}

TEST(MotionModel, NamesRoundTrip) {
  for (auto m : {motion_model::global_pan, motion_model::multi_object, motion_model::static_noise})
    EXPECT_EQ(parse_motion_model(to_string(m)), m);
  EXPECT_FALSE(parse_motion_model("zoom"));
}
