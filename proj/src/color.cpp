#include "vidpipe/color.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "vidpipe/errors.hpp"

namespace vidpipe {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

VideoFrame with_planes(const VideoFrame &src, Layout layout, ColorSpace cs) {
  VideoFrame out;
  out.width = src.width;
  out.height = src.height;
  out.format = src.format;
  out.format.layout = layout;
  out.colorspace = cs;
  out.frame_index = src.frame_index;
  return out;
}

void require_layout(const VideoFrame &f, Layout layout, const char *op) {
  if (f.format.layout != layout) {
    throw FormatMismatch(std::string(op) + " expects " + std::string(to_string(layout)) + " input, got " +
                         std::string(to_string(f.format.layout)));
  }
}

}  // namespace

MatrixCoefficients coefficients(ColorSpace cs) {
  switch (cs) {
    case ColorSpace::BT601: return {0.299, 0.114};
    case ColorSpace::BT709: return {0.2126, 0.0722};
    case ColorSpace::BT2020: return {0.2627, 0.0593};
  }
  return {0.2126, 0.0722};
}

std::string_view to_string(ColorSpace cs) {
  switch (cs) {
    case ColorSpace::BT601: return "bt601";
    case ColorSpace::BT709: return "bt709";
    case ColorSpace::BT2020: return "bt2020";
  }
  return "?";
}

ColorSpace parse_colorspace(std::string_view text) {
  const auto s = lower(text);
  if (s == "bt601") return ColorSpace::BT601;
  if (s == "bt709") return ColorSpace::BT709;
  if (s == "bt2020") return ColorSpace::BT2020;
  throw InvalidConfig("unknown colorspace '" + std::string(text) + "'");
}

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::RGB: return "rgb";
    case Layout::YUV444: return "yuv444";
    case Layout::YUV420: return "yuv420";
  }
  return "?";
}

Layout parse_layout(std::string_view text) {
  const auto s = lower(text);
  if (s == "rgb") return Layout::RGB;
  if (s == "yuv444") return Layout::YUV444;
  if (s == "yuv420") return Layout::YUV420;
  throw InvalidConfig("unknown pixel format '" + std::string(text) + "'");
}

std::string_view to_string(Range range) { return range == Range::Full ? "full" : "limited"; }

Range parse_range(std::string_view text) {
  const auto s = lower(text);
  if (s == "limited") return Range::Limited;
  if (s == "full") return Range::Full;
  throw InvalidConfig("unknown range '" + std::string(text) + "'");
}

std::pair<int, int> chroma_dims(Layout layout, int width, int height) {
  if (layout != Layout::YUV420) return {width, height};
  if (width % 2 != 0 || height % 2 != 0) {
    throw DimensionError("4:2:0 needs even dimensions, got " + std::to_string(width) + "x" + std::to_string(height));
  }
  return {width / 2, height / 2};
}

VideoFrame VideoFrame::blank(int width, int height, PixelFormat format, ColorSpace cs, float luma, float chroma) {
  VideoFrame f;
  f.width = width;
  f.height = height;
  f.format = format;
  f.colorspace = cs;
  const auto [cw, ch] = chroma_dims(format.layout, width, height);
  if (format.layout == Layout::RGB) {
    for (auto &p : f.planes) p = Plane(width, height, luma);
  } else {
    f.planes[0] = Plane(width, height, luma);
    f.planes[1] = Plane(cw, ch, chroma);
    f.planes[2] = Plane(cw, ch, chroma);
  }
  return f;
}

void check_frame(const VideoFrame &f) {
  const auto [cw, ch] = chroma_dims(f.format.layout, f.width, f.height);
  for (std::size_t i = 0; i < f.planes.size(); ++i) {
    const auto &p = f.planes[i];
    const int ew = i == 0 ? f.width : cw;
    const int eh = i == 0 ? f.height : ch;
    if (p.width != ew || p.height != eh || p.data.size() != std::size_t(ew) * std::size_t(eh)) {
      throw DimensionError("plane " + std::to_string(i) + " is " + std::to_string(p.width) + "x" +
                           std::to_string(p.height) + ", expected " + std::to_string(ew) + "x" + std::to_string(eh));
    }
    for (float v : p.data) {
      if (!std::isfinite(v)) throw FormatMismatch("non-finite sample in plane " + std::to_string(i));
    }
  }
}

VideoFrame rgb_to_yuv444(const VideoFrame &f, ColorSpace cs) {
  require_layout(f, Layout::RGB, "rgb_to_yuv444");
  const auto m = coefficients(cs);
  const double kg = m.kg();
  const double su = 1.0 / (2.0 * (1.0 - m.kb));
  const double sv = 1.0 / (2.0 * (1.0 - m.kr));

  VideoFrame out = with_planes(f, Layout::YUV444, cs);
  for (auto &p : out.planes) p = Plane(f.width, f.height);
  const std::size_t count = f.planes[0].data.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double r = f.planes[0].data[i];
    const double g = f.planes[1].data[i];
    const double b = f.planes[2].data[i];
    const double y = m.kr * r + kg * g + m.kb * b;
    out.planes[0].data[i] = float(y);
    out.planes[1].data[i] = float((b - y) * su + 0.5);
    out.planes[2].data[i] = float((r - y) * sv + 0.5);
  }
  return out;
}

VideoFrame yuv444_to_rgb(const VideoFrame &f, ColorSpace cs) {
  require_layout(f, Layout::YUV444, "yuv444_to_rgb");
  const auto m = coefficients(cs);
  const double kg = m.kg();

  VideoFrame out = with_planes(f, Layout::RGB, cs);
  for (auto &p : out.planes) p = Plane(f.width, f.height);
  const std::size_t count = f.planes[0].data.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double y = f.planes[0].data[i];
    const double u = f.planes[1].data[i] - 0.5;
    const double v = f.planes[2].data[i] - 0.5;
    const double r = y + 2.0 * (1.0 - m.kr) * v;
    const double b = y + 2.0 * (1.0 - m.kb) * u;
    const double g = (y - m.kr * r - m.kb * b) / kg;
    out.planes[0].data[i] = float(std::clamp(r, 0.0, 1.0));
    out.planes[1].data[i] = float(std::clamp(g, 0.0, 1.0));
    out.planes[2].data[i] = float(std::clamp(b, 0.0, 1.0));
  }
  return out;
}

VideoFrame chroma_down_420(const VideoFrame &f) {
  require_layout(f, Layout::YUV444, "chroma_down_420");
  const auto [cw, ch] = chroma_dims(Layout::YUV420, f.width, f.height);
  VideoFrame out = with_planes(f, Layout::YUV420, f.colorspace);
  out.planes[0] = f.planes[0];
  for (std::size_t c = 1; c < 3; ++c) {
    const Plane &src = f.planes[c];
    Plane dst(cw, ch);
    for (int i = 0; i < ch; ++i) {
      for (int j = 0; j < cw; ++j) {
        dst.at(i, j) = float(0.5 * (double(src.at(2 * i, 2 * j)) + double(src.at(2 * i + 1, 2 * j))));
      }
    }
    out.planes[c] = std::move(dst);
  }
  return out;
}

VideoFrame chroma_up_420(const VideoFrame &f) {
  require_layout(f, Layout::YUV420, "chroma_up_420");
  const auto [cw, ch] = chroma_dims(Layout::YUV420, f.width, f.height);
  VideoFrame out = with_planes(f, Layout::YUV444, f.colorspace);
  out.planes[0] = f.planes[0];
  for (std::size_t c = 1; c < 3; ++c) {
    const Plane &src = f.planes[c];
    if (src.width != cw || src.height != ch) throw DimensionError("chroma plane does not match 4:2:0 dims");
    Plane dst(f.width, f.height);
    for (int y = 0; y < f.height; ++y) {
      // chroma row i sits at luma row 2i + 0.5
      const double sy = std::clamp((y - 0.5) / 2.0, 0.0, double(ch - 1));
      const int y0 = int(std::floor(sy));
      const int y1 = std::min(y0 + 1, ch - 1);
      const double fy = sy - y0;
      for (int x = 0; x < f.width; ++x) {
        const double sx = std::min(x / 2.0, double(cw - 1));
        const int x0 = int(std::floor(sx));
        const int x1 = std::min(x0 + 1, cw - 1);
        const double fx = sx - x0;
        const double top = (1.0 - fx) * src.at(y0, x0) + fx * src.at(y0, x1);
        const double bottom = (1.0 - fx) * src.at(y1, x0) + fx * src.at(y1, x1);
        dst.at(y, x) = float((1.0 - fy) * top + fy * bottom);
      }
    }
    out.planes[c] = std::move(dst);
  }
  return out;
}

VideoFrame convert_layout(const VideoFrame &f, Layout target, ColorSpace cs) {
  const Layout from = f.format.layout;
  if (from == target) return f;
  switch (target) {
    case Layout::RGB:
      return yuv444_to_rgb(from == Layout::YUV420 ? chroma_up_420(f) : f, cs);
    case Layout::YUV444:
      return from == Layout::RGB ? rgb_to_yuv444(f, cs) : chroma_up_420(f);
    case Layout::YUV420:
      return chroma_down_420(from == Layout::RGB ? rgb_to_yuv444(f, cs) : f);
  }
  return f;
}

PlaneKind plane_kind(Layout layout, std::size_t plane) {
  return layout == Layout::RGB || plane == 0 ? PlaneKind::Luma : PlaneKind::Chroma;
}

namespace {

struct CodeMap {
  double offset;
  double scale;
  double max_code;
};

CodeMap code_map(int depth, Range range, PlaneKind kind) {
  if (depth != 8 && depth != 10 && depth != 16) {
    throw InvalidConfig("unsupported bit depth " + std::to_string(depth));
  }
  const double max_code = double((1u << depth) - 1u);
  if (range == Range::Full) return {0.0, max_code, max_code};
  const double step = double(1u << (depth - 8));
  return {16.0 * step, (kind == PlaneKind::Luma ? 219.0 : 224.0) * step, max_code};
}

}  // namespace

std::vector<std::uint16_t> quantize(std::span<const float> samples, int depth, Range range, PlaneKind kind) {
  const auto m = code_map(depth, range, kind);
  std::vector<std::uint16_t> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double code = std::floor(m.offset + double(samples[i]) * m.scale + 0.5);
    out[i] = std::uint16_t(std::clamp(code, 0.0, m.max_code));
  }
  return out;
}

std::vector<float> dequantize(std::span<const std::uint16_t> codes, int depth, Range range, PlaneKind kind) {
  const auto m = code_map(depth, range, kind);
  std::vector<float> out(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) out[i] = float((double(codes[i]) - m.offset) / m.scale);
  return out;
}

}  // namespace vidpipe
