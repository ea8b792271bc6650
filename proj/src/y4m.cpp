#include "vidpipe/y4m.hpp"

#include <charconv>
#include <sstream>

#include "vidpipe/errors.hpp"

namespace vidpipe {

namespace {

constexpr std::string_view kSignature = "YUV4MPEG2";
constexpr std::size_t kMaxLine = 4096;

std::int64_t parse_positive(std::string_view text, const std::string &tag) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v <= 0) throw BadHeaderParam(tag);
  return v;
}

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  for (std::string t; ss >> t;) tokens.push_back(t);
  return tokens;
}

std::size_t sample_bytes(int depth) { return depth > 8 ? 2 : 1; }

}  // namespace

std::pair<Layout, int> parse_chroma_tag(const std::string &tag) {
  if (tag == "420" || tag == "420jpeg" || tag == "420paldv" || tag == "420mpeg2") return {Layout::YUV420, 8};
  if (tag == "444") return {Layout::YUV444, 8};
  if (tag == "420p10") return {Layout::YUV420, 10};
  if (tag == "444p10") return {Layout::YUV444, 10};
  if (tag == "420p16") return {Layout::YUV420, 16};
  if (tag == "444p16") return {Layout::YUV444, 16};
  throw BadHeaderParam("C" + tag);
}

std::size_t StreamHeader::payload_bytes() const {
  const auto [cw, ch] = chroma_dims(format.layout, width, height);
  const std::size_t samples = std::size_t(width) * std::size_t(height) + 2 * std::size_t(cw) * std::size_t(ch);
  return samples * sample_bytes(format.depth);
}

void StreamHeader::set_format(Layout layout, int depth) {
  if (layout == Layout::RGB) throw FormatMismatch("Y4M carries YUV only");
  const bool same = format.layout == layout && format.depth == depth;
  format.layout = layout;
  format.depth = depth;
  if (same) return;
  const std::string base = layout == Layout::YUV420 ? "420" : "444";
  chroma = depth == 8 ? (layout == Layout::YUV420 ? "420mpeg2" : "444") : base + "p" + std::to_string(depth);
  if (order.find('C') == std::string::npos) order += 'C';
}

void StreamHeader::set_range(Range range) {
  format.range = range;
  const std::string value = range == Range::Full ? "COLORRANGE=FULL" : "COLORRANGE=LIMITED";
  for (auto &x : extras) {
    if (x.rfind("COLORRANGE=", 0) == 0) {
      x = value;
      return;
    }
  }
  extras.push_back(value);
  order += 'X';
}

StreamHeader parse_y4m_header(const std::string &line) {
  const auto tokens = split(line);
  if (tokens.empty() || tokens.front() != kSignature) throw BadSignature("stream does not start with YUV4MPEG2");

  StreamHeader h;
  h.order.clear();
  h.chroma.clear();
  bool have_w = false, have_h = false, have_f = false;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string &tok = tokens[i];
    const char tag = tok[0];
    const std::string value = tok.substr(1);
    switch (tag) {
      case 'W':
        h.width = int(parse_positive(value, tok));
        have_w = true;
        break;
      case 'H':
        h.height = int(parse_positive(value, tok));
        have_h = true;
        break;
      case 'F': {
        const auto colon = value.find(':');
        if (colon == std::string::npos) throw BadHeaderParam(tok);
        h.fps = {parse_positive(std::string_view(value).substr(0, colon), tok),
                 parse_positive(std::string_view(value).substr(colon + 1), tok)};
        have_f = true;
        break;
      }
      case 'I':
        if (value.size() != 1 || std::string_view("ptbm?").find(value[0]) == std::string_view::npos) {
          throw BadHeaderParam(tok);
        }
        h.interlace = value;
        break;
      case 'A':
        if (value.find(':') == std::string::npos) throw BadHeaderParam(tok);
        h.aspect = value;
        break;
      case 'C':
        parse_chroma_tag(value);
        h.chroma = value;
        break;
      case 'X':
        h.extras.push_back(value);
        break;
      default:
        throw BadHeaderParam(tok);
    }
    if (tag != 'X' && h.order.find(tag) != std::string::npos) throw BadHeaderParam(tok);
    h.order += tag;
  }
  if (!have_w) throw BadHeaderParam("W (missing)");
  if (!have_h) throw BadHeaderParam("H (missing)");
  if (!have_f) throw BadHeaderParam("F (missing)");

  const auto [layout, depth] = parse_chroma_tag(h.chroma.empty() ? "420" : h.chroma);
  h.format = {layout, depth, Range::Limited};
  for (const auto &x : h.extras) {
    if (x == "COLORRANGE=FULL") h.format.range = Range::Full;
  }
  if (layout == Layout::YUV420 && (h.width % 2 || h.height % 2)) {
    throw BadHeaderParam("W/H must be even for 4:2:0, got " + std::to_string(h.width) + "x" + std::to_string(h.height));
  }
  return h;
}

std::string format_y4m_header(const StreamHeader &h) {
  std::string line(kSignature);
  std::size_t extra = 0;
  for (char tag : h.order) {
    line += ' ';
    line += tag;
    switch (tag) {
      case 'W': line += std::to_string(h.width); break;
      case 'H': line += std::to_string(h.height); break;
      case 'F': line += std::to_string(h.fps.num) + ":" + std::to_string(h.fps.den); break;
      case 'I': line += h.interlace; break;
      case 'A': line += h.aspect; break;
      case 'C': line += h.chroma; break;
      case 'X': line += h.extras.at(extra++); break;
      default: break;
    }
  }
  return line + '\n';
}

// ---------------------------------------------------------------------------------------------------------------------
// Reader

Y4mReader::Y4mReader(std::istream &in, ColorSpace cs) : in_(in), colorspace_(cs) {
  std::string line;
  char c = 0;
  while (in_.get(c) && c != '\n') {
    line += c;
    if (line.size() > kMaxLine) throw BadSignature("header line too long");
  }
  if (c != '\n') {
    if (line.rfind(kSignature, 0) != 0) throw BadSignature("stream does not start with YUV4MPEG2");
    throw BadHeaderParam("header line not terminated");
  }
  header_ = parse_y4m_header(line);
}

std::optional<VideoFrame> Y4mReader::next() {
  std::string line;
  char c = 0;
  if (!in_.get(c)) return std::nullopt;
  line += c;
  while (c != '\n' && line.size() <= kMaxLine && in_.get(c)) {
    if (c != '\n') line += c;
  }
  if (c != '\n' || line.rfind("FRAME", 0) != 0 || (line.size() > 5 && line[5] != ' ')) throw TruncatedFrame(index_);

  const std::size_t bytes = header_.payload_bytes();
  buffer_.resize(bytes);
  in_.read(reinterpret_cast<char *>(buffer_.data()), std::streamsize(bytes));
  if (std::size_t(in_.gcount()) != bytes) throw TruncatedFrame(index_);

  const PixelFormat &fmt = header_.format;
  VideoFrame f = VideoFrame::blank(header_.width, header_.height, fmt, colorspace_);
  f.frame_index = index_++;
  const std::size_t width = sample_bytes(fmt.depth);
  std::size_t pos = 0;
  std::vector<std::uint16_t> codes;
  for (std::size_t p = 0; p < 3; ++p) {
    Plane &plane = f.planes[p];
    codes.resize(plane.data.size());
    for (auto &code : codes) {
      code = width == 1 ? buffer_[pos] : std::uint16_t(buffer_[pos] | (buffer_[pos + 1] << 8));
      pos += width;
    }
    plane.data = dequantize(codes, fmt.depth, fmt.range, plane_kind(fmt.layout, p));
  }
  return f;
}

// ---------------------------------------------------------------------------------------------------------------------
// Writer

Y4mWriter::Y4mWriter(std::ostream &out, StreamHeader header) : out_(out), header_(std::move(header)) {
  const auto line = format_y4m_header(header_);
  out_.write(line.data(), std::streamsize(line.size()));
  if (!out_) throw IoError("failed to write Y4M header");
}

void Y4mWriter::write(const VideoFrame &frame) {
  const PixelFormat &fmt = header_.format;
  if (frame.width != header_.width || frame.height != header_.height || frame.format.layout != fmt.layout) {
    throw FormatMismatch("frame " + std::to_string(frame.frame_index) + " is " + std::to_string(frame.width) + "x" +
                         std::to_string(frame.height) + " " + std::string(to_string(frame.format.layout)) +
                         ", stream is " + std::to_string(header_.width) + "x" + std::to_string(header_.height) + " " +
                         std::string(to_string(fmt.layout)));
  }
  check_frame(frame);
  const std::size_t width = sample_bytes(fmt.depth);
  buffer_.resize(header_.payload_bytes());
  std::size_t pos = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    const auto codes = quantize(frame.planes[p].data, fmt.depth, fmt.range, plane_kind(fmt.layout, p));
    for (auto code : codes) {
      buffer_[pos++] = static_cast<unsigned char>(code & 0xff);
      if (width == 2) buffer_[pos++] = static_cast<unsigned char>(code >> 8);
    }
  }
  out_.write("FRAME\n", 6);
  out_.write(reinterpret_cast<const char *>(buffer_.data()), std::streamsize(buffer_.size()));
  if (!out_) throw IoError("failed to write frame " + std::to_string(written_));
  ++written_;
}

std::pair<StreamHeader, std::vector<VideoFrame>> read_y4m(std::istream &in, ColorSpace cs) {
  Y4mReader reader(in, cs);
  std::vector<VideoFrame> frames;
  while (auto f = reader.next()) frames.push_back(std::move(*f));
  return {reader.header(), std::move(frames)};
}

void write_y4m(std::ostream &out, const StreamHeader &header, std::span<const VideoFrame> frames) {
  Y4mWriter writer(out, header);
  for (const auto &f : frames) writer.write(f);
}

}  // namespace vidpipe
