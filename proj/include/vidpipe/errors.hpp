#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vidpipe {

// Two failure classes surface at the CLI: configuration problems (exit 1)
// and I/O or stream-format problems (exit 2).
enum class ErrorClass { Config, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string &what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

#define VIDPIPE_DEFINE_ERROR(Name, Class)                                                \
  class Name : public Error {                                                            \
   public:                                                                               \
    explicit Name(const std::string &what) : Error(ErrorClass::Class, #Name ": " + what) {} \
  };

// descriptor / configuration
VIDPIPE_DEFINE_ERROR(InvalidConfig, Config)
VIDPIPE_DEFINE_ERROR(ConfigError, Config)
VIDPIPE_DEFINE_ERROR(ManifestError, Config)
VIDPIPE_DEFINE_ERROR(UnsupportedColorspace, Config)

// scene lists
VIDPIPE_DEFINE_ERROR(RangeError, Config)

// layout arithmetic and tensors
VIDPIPE_DEFINE_ERROR(LayoutError, Config)
VIDPIPE_DEFINE_ERROR(CapacityError, Config)
VIDPIPE_DEFINE_ERROR(ShapeError, Config)
VIDPIPE_DEFINE_ERROR(DimensionError, Config)

// streams and files
VIDPIPE_DEFINE_ERROR(IoError, Io)
VIDPIPE_DEFINE_ERROR(FormatMismatch, Io)
VIDPIPE_DEFINE_ERROR(BadSignature, Io)
VIDPIPE_DEFINE_ERROR(BadHeaderParam, Io)

#undef VIDPIPE_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string &what)
      : Error(ErrorClass::Io, "ParseError: line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TruncatedFrame : public Error {
 public:
  explicit TruncatedFrame(std::int64_t index)
      : Error(ErrorClass::Io, "TruncatedFrame: frame " + std::to_string(index)), index_(index) {}
  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

}  // namespace vidpipe
