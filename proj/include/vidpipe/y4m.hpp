#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vidpipe/color.hpp"

namespace vidpipe {

struct FrameRate {
  std::int64_t num = 25;
  std::int64_t den = 1;
  friend bool operator==(const FrameRate &, const FrameRate &) = default;
};

// YUV4MPEG2 stream header. Parameters are written back in the order they
// were read, so an unmodified header reproduces its input byte for byte.
struct StreamHeader {
  int width = 0;
  int height = 0;
  FrameRate fps;
  std::string interlace = "p";
  std::string aspect = "1:1";
  std::string chroma = "420mpeg2";  // the C tag value
  PixelFormat format;               // derived from `chroma` and XCOLORRANGE
  std::vector<std::string> extras;  // X parameters, without the leading 'X'
  std::string order = "WHFIAC";     // tag letters as they appear; X once per extra

  // Bytes of one frame payload (not counting the FRAME line).
  std::size_t payload_bytes() const;

  // Switches layout/depth, keeping the siting family of 4:2:0 tags.
  void set_format(Layout layout, int depth);
  void set_range(Range range);
};

// Layout and depth for a C tag; throws BadHeaderParam for unsupported tags.
std::pair<Layout, int> parse_chroma_tag(const std::string &tag);

StreamHeader parse_y4m_header(const std::string &line);
std::string format_y4m_header(const StreamHeader &h);

class Y4mReader {
 public:
  // Reads and parses the header line. Throws BadSignature / BadHeaderParam.
  explicit Y4mReader(std::istream &in, ColorSpace cs = ColorSpace::BT709);

  const StreamHeader &header() const { return header_; }
  void set_colorspace(ColorSpace cs) { colorspace_ = cs; }
  // Decoding range for the frames that follow.
  void set_range(Range range) { header_.format.range = range; }

  // Next frame, or nullopt at a clean end of stream. Throws TruncatedFrame.
  std::optional<VideoFrame> next();

 private:
  std::istream &in_;
  StreamHeader header_;
  ColorSpace colorspace_;
  std::int64_t index_ = 0;
  std::vector<unsigned char> buffer_;
};

class Y4mWriter {
 public:
  Y4mWriter(std::ostream &out, StreamHeader header);

  const StreamHeader &header() const { return header_; }

  // Throws FormatMismatch when the frame does not match the header.
  void write(const VideoFrame &frame);
  std::int64_t frames_written() const { return written_; }

 private:
  std::ostream &out_;
  StreamHeader header_;
  std::int64_t written_ = 0;
  std::vector<unsigned char> buffer_;
};

std::pair<StreamHeader, std::vector<VideoFrame>> read_y4m(std::istream &in, ColorSpace cs = ColorSpace::BT709);
void write_y4m(std::ostream &out, const StreamHeader &header, std::span<const VideoFrame> frames);

}  // namespace vidpipe
