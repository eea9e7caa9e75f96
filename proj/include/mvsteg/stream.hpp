#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvsteg/error.hpp"
#include "mvsteg/motion_vector.hpp"

namespace mvsteg {

enum class partition_kind : std::uint8_t { p_skip = 0, p16x16 = 1, p16x8 = 2, p8x16 = 3, p8x8 = 4, intra = 5 };

inline constexpr std::array<partition_kind, 4> inter_partitions = {
    partition_kind::p16x16, partition_kind::p16x8, partition_kind::p8x16, partition_kind::p8x8};

inline int sub_block_count(partition_kind p) {
  switch (p) {
    case partition_kind::p16x16: return 1;
    case partition_kind::p16x8:
    case partition_kind::p8x16: return 2;
    case partition_kind::p8x8: return 4;
    default: return 0;
  }
}

inline bool is_inter_coded(partition_kind p) { return sub_block_count(p) > 0; }

inline std::string_view to_string(partition_kind p) {
  switch (p) {
    case partition_kind::p_skip: return "PSkip";
    case partition_kind::p16x16: return "16x16";
    case partition_kind::p16x8: return "16x8";
    case partition_kind::p8x16: return "8x16";
    case partition_kind::p8x8: return "8x8";
    case partition_kind::intra: return "Intra";
  }
  return "?";
}

// Coding outcome of one 16x16 macroblock.
struct macroblock_record {
  int frame_index = 0;
  int mb_row = 0;
  int mb_col = 0;
  partition_kind partition = partition_kind::intra;
  // One MV per sub-block in raster order; empty for PSkip and Intra.
  std::vector<motion_vector> mvs;
  // Prediction for the first sub-block; for PSkip, the inferred MV.
  motion_vector mvp;
  bool all_coeffs_zero = true;

  bool operator==(const macroblock_record&) const = default;
};

struct coded_macroblock {
  macroblock_record record;
  // 16 4x4 tiles in raster order, each in zigzag order; empty for PSkip.
  std::vector<std::int16_t> coeffs;

  bool operator==(const coded_macroblock&) const = default;
};

enum class frame_type : std::uint8_t { i = 0, p = 1 };

struct coded_frame {
  frame_type type = frame_type::i;
  std::vector<coded_macroblock> macroblocks;

  bool operator==(const coded_frame&) const = default;
};

struct stream_header {
  int width = 0;
  int height = 0;
  std::uint32_t n_frames = 0;
  int qp = 0;
  int gop_size = 6;
  // Empty when the stream was coded without an embedder.
  std::string embedder;
  std::uint64_t seed = 0;

  bool operator==(const stream_header&) const = default;
};

struct encoded_stream {
  stream_header header;
  std::vector<coded_frame> frames;

  int mb_cols() const { return header.width / 16; }
  int mb_rows() const { return header.height / 16; }
  int mbs_per_frame() const { return mb_cols() * mb_rows(); }

  bool operator==(const encoded_stream&) const = default;
};

inline bool is_i_frame(std::size_t frame_index, int gop_size) {
  return gop_size <= 0 ? frame_index == 0 : frame_index % static_cast<std::size_t>(gop_size) == 0;
}

// ---------------------------------------------------------------------------
// Container format (little-endian):
//   "MVSL" u16 version=1, u16 width, u16 height, u32 n_frames, u8 qp, u8 gop,
//   u16 len + embedder descriptor, u64 seed,
//   per frame: u8 type, u32 mb count,
//     per mb: u8 partition, u8 mv count, mv count x (i16 h, i16 v), i16 mvp h,
//             i16 mvp v, u32 coefficient count, count x i16.

inline constexpr std::array<std::uint8_t, 4> stream_magic = {'M', 'V', 'S', 'L'};
inline constexpr std::uint16_t stream_version = 1;

namespace detail {

class byte_writer {
public:
  template <typename T>
  void put(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(u & 0xFF));
      if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
    }
  }
  void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
  std::vector<std::uint8_t> bytes_;
};

class byte_reader {
public:
  explicit byte_reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::span<const std::uint8_t> get_bytes(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw malformed_stream(std::string("truncated ") + what, pos_);
  }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
T checked_narrow(long long value, const char* what) {
  if (value < std::numeric_limits<T>::min() || value > std::numeric_limits<T>::max()) {
    throw invalid_argument(std::string(what) + " out of range for the container format");
  }
  return static_cast<T>(value);
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const encoded_stream& s) {
  using detail::checked_narrow;
  detail::byte_writer w;
  w.put_bytes(stream_magic);
  w.put(stream_version);
  w.put(checked_narrow<std::uint16_t>(s.header.width, "width"));
  w.put(checked_narrow<std::uint16_t>(s.header.height, "height"));
  w.put(s.header.n_frames);
  w.put(checked_narrow<std::uint8_t>(s.header.qp, "qp"));
  w.put(checked_narrow<std::uint8_t>(s.header.gop_size, "gop size"));
  w.put(checked_narrow<std::uint16_t>(static_cast<long long>(s.header.embedder.size()), "descriptor length"));
  w.put_bytes({reinterpret_cast<const std::uint8_t*>(s.header.embedder.data()), s.header.embedder.size()});
  w.put(s.header.seed);
  for (const auto& f : s.frames) {
    w.put(static_cast<std::uint8_t>(f.type));
    w.put(checked_narrow<std::uint32_t>(static_cast<long long>(f.macroblocks.size()), "macroblock count"));
    for (const auto& mb : f.macroblocks) {
      w.put(static_cast<std::uint8_t>(mb.record.partition));
      w.put(checked_narrow<std::uint8_t>(static_cast<long long>(mb.record.mvs.size()), "mv count"));
      for (const auto& mv : mb.record.mvs) {
        w.put(checked_narrow<std::int16_t>(mv.h, "mv"));
        w.put(checked_narrow<std::int16_t>(mv.v, "mv"));
      }
      w.put(checked_narrow<std::int16_t>(mb.record.mvp.h, "mvp"));
      w.put(checked_narrow<std::int16_t>(mb.record.mvp.v, "mvp"));
      w.put(checked_narrow<std::uint32_t>(static_cast<long long>(mb.coeffs.size()), "coefficient count"));
      for (auto c : mb.coeffs) w.put(c);
    }
  }
  return w.take();
}

// Parses a container. Records get their grid position from the framing, and
// all_coeffs_zero from the payload; semantic checks are left to the decoder.
inline encoded_stream deserialize(std::span<const std::uint8_t> bytes) {
  detail::byte_reader r(bytes);
  const auto magic = r.get_bytes(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), stream_magic.begin())) throw magic_mismatch("not an MVSL stream");
  const auto version = r.get<std::uint16_t>("version");
  if (version != stream_version) throw version_unsupported("unsupported stream version " + std::to_string(version));

  encoded_stream s;
  s.header.width = r.get<std::uint16_t>("width");
  s.header.height = r.get<std::uint16_t>("height");
  s.header.n_frames = r.get<std::uint32_t>("frame count");
  s.header.qp = r.get<std::uint8_t>("qp");
  s.header.gop_size = r.get<std::uint8_t>("gop size");
  const auto desc_len = r.get<std::uint16_t>("descriptor length");
  const auto desc = r.get_bytes(desc_len, "descriptor");
  s.header.embedder.assign(desc.begin(), desc.end());
  s.header.seed = r.get<std::uint64_t>("seed");
  if (s.header.width % 16 != 0 || s.header.height % 16 != 0 || s.header.width == 0 || s.header.height == 0) {
    throw malformed_stream("dimensions are not positive multiples of 16", 8);
  }
  const int cols = s.header.width / 16;
  const std::size_t expected_mbs = static_cast<std::size_t>(cols) * (s.header.height / 16);

  // Each frame needs at least 5 bytes; reject absurd counts before reserving.
  if (s.header.n_frames > r.remaining() / 5 + 1) {
    throw malformed_stream("header declares " + std::to_string(s.header.n_frames) +
                               " frames but the payload is too short",
                           r.offset());
  }
  s.frames.reserve(s.header.n_frames);
  for (std::uint32_t fi = 0; fi < s.header.n_frames; ++fi) {
    const std::size_t frame_offset = r.offset();
    coded_frame f;
    const auto type = r.get<std::uint8_t>("frame type");
    if (type > 1) throw malformed_stream("bad frame type " + std::to_string(type), frame_offset);
    f.type = static_cast<frame_type>(type);
    const auto count = r.get<std::uint32_t>("macroblock count");
    if (count != expected_mbs) {
      throw malformed_stream("frame " + std::to_string(fi) + " has " + std::to_string(count) +
                                 " macroblocks, expected " + std::to_string(expected_mbs),
                             frame_offset);
    }
    f.macroblocks.reserve(count);
    for (std::uint32_t m = 0; m < count; ++m) {
      const std::size_t mb_offset = r.offset();
      coded_macroblock mb;
      auto& rec = mb.record;
      rec.frame_index = static_cast<int>(fi);
      rec.mb_row = static_cast<int>(m) / cols;
      rec.mb_col = static_cast<int>(m) % cols;
      const auto part = r.get<std::uint8_t>("partition");
      if (part > 5) throw malformed_stream("bad partition code " + std::to_string(part), mb_offset);
      rec.partition = static_cast<partition_kind>(part);
      const auto n_mvs = r.get<std::uint8_t>("mv count");
      if (n_mvs != sub_block_count(rec.partition)) {
        throw malformed_stream("mv count " + std::to_string(n_mvs) + " does not match partition " +
                                   std::string(to_string(rec.partition)),
                               mb_offset);
      }
      for (int i = 0; i < n_mvs; ++i) {
        const int h = r.get<std::int16_t>("mv");
        const int v = r.get<std::int16_t>("mv");
        rec.mvs.push_back({h, v});
      }
      rec.mvp.h = r.get<std::int16_t>("mvp");
      rec.mvp.v = r.get<std::int16_t>("mvp");
      const auto n_coeffs = r.get<std::uint32_t>("coefficient count");
      r.need(static_cast<std::size_t>(n_coeffs) * 2, "coefficients");
      mb.coeffs.resize(n_coeffs);
      for (auto& c : mb.coeffs) c = r.get<std::int16_t>("coefficients");
      rec.all_coeffs_zero =
          std::all_of(mb.coeffs.begin(), mb.coeffs.end(), [](std::int16_t c) { return c == 0; });
      f.macroblocks.push_back(std::move(mb));
    }
    s.frames.push_back(std::move(f));
  }
  if (r.remaining() != 0) throw malformed_stream("trailing bytes after last frame", r.offset());
  return s;
}

}  // namespace mvsteg
