#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mvsteg {

// Base of every error the library raises.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class truncated_file : public error {
public:
  using error::error;
};

class dimension_not_aligned : public error {
public:
  using error::error;
};

class invalid_argument : public error {
public:
  using error::error;
};

class invalid_qp : public error {
public:
  using error::error;
};

class empty_video : public error {
public:
  using error::error;
};

class magic_mismatch : public error {
public:
  using error::error;
};

class version_unsupported : public error {
public:
  using error::error;
};

// Framing or semantic violation in a coded stream. The byte offset is known
// for failures found while parsing, and absent for ones found while decoding.
class malformed_stream : public error {
public:
  explicit malformed_stream(const std::string& what,
                            std::optional<std::size_t> offset = std::nullopt)
      : error(offset ? what + " (at byte " + std::to_string(*offset) + ")" : what),
        offset_(offset) {}

  std::optional<std::size_t> offset() const noexcept { return offset_; }

private:
  std::optional<std::size_t> offset_;
};

class rate_too_high : public error {
public:
  using error::error;
};

class no_skip_blocks : public error {
public:
  using error::error;
};

class single_class_input : public error {
public:
  using error::error;
};

class too_few_pairs : public error {
public:
  using error::error;
};

class io_error : public error {
public:
  using error::error;
};

}  // namespace mvsteg
