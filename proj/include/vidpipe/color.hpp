#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace vidpipe {

enum class ColorSpace { BT601, BT709, BT2020 };

struct MatrixCoefficients {
  double kr;
  double kb;
  double kg() const { return 1.0 - kr - kb; }
};

MatrixCoefficients coefficients(ColorSpace cs);
std::string_view to_string(ColorSpace cs);
// Accepts "bt601", "bt709", "bt2020" (case-insensitive). Throws InvalidConfig.
ColorSpace parse_colorspace(std::string_view text);

enum class Layout { RGB, YUV444, YUV420 };
enum class Range { Limited, Full };

std::string_view to_string(Layout layout);
Layout parse_layout(std::string_view text);
std::string_view to_string(Range range);
Range parse_range(std::string_view text);

// Storage description of a frame. Depth and range only matter at I/O
// boundaries; the working representation is always normalized float.
struct PixelFormat {
  Layout layout = Layout::YUV420;
  int depth = 8;
  Range range = Range::Limited;

  friend bool operator==(const PixelFormat &, const PixelFormat &) = default;
};

struct Plane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  Plane() = default;
  Plane(int w, int h, float fill = 0.0f) : width(w), height(h), data(std::size_t(w) * std::size_t(h), fill) {}

  float &at(int y, int x) { return data[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  float at(int y, int x) const { return data[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }

  friend bool operator==(const Plane &, const Plane &) = default;
};

// Planar frame in normalized float. Planes are (R,G,B) or (Y,U,V).
// Samples decoded from limited-range storage may fall slightly outside
// [0,1] (foot/head room); they are kept so that storage round-trips exactly.
struct VideoFrame {
  std::array<Plane, 3> planes;
  int width = 0;
  int height = 0;
  PixelFormat format;
  ColorSpace colorspace = ColorSpace::BT709;
  std::int64_t frame_index = 0;

  static VideoFrame blank(int width, int height, PixelFormat format, ColorSpace cs, float luma = 0.0f,
                          float chroma = 0.5f);
};

// Chroma plane dimensions for a layout; throws DimensionError for odd 4:2:0 sizes.
std::pair<int, int> chroma_dims(Layout layout, int width, int height);

// Checks plane count, plane dims against the layout, and finiteness.
void check_frame(const VideoFrame &f);

VideoFrame rgb_to_yuv444(const VideoFrame &f, ColorSpace cs);
VideoFrame yuv444_to_rgb(const VideoFrame &f, ColorSpace cs);

// MPEG-2 siting: chroma co-sited with even luma columns, vertically
// centred between each row pair.
VideoFrame chroma_down_420(const VideoFrame &f);
VideoFrame chroma_up_420(const VideoFrame &f);

// Runs whichever chain of the four conversions above maps f onto target.
VideoFrame convert_layout(const VideoFrame &f, Layout target, ColorSpace cs);

enum class PlaneKind { Luma, Chroma };

// Limited range: luma [0,1] -> [16,235]*2^(depth-8), chroma [0,1] -> [16,240]*2^(depth-8).
// Full range: [0,1] -> [0, 2^depth-1]. Round half up, clamp to the code range.
std::vector<std::uint16_t> quantize(std::span<const float> samples, int depth, Range range, PlaneKind kind);
std::vector<float> dequantize(std::span<const std::uint16_t> codes, int depth, Range range, PlaneKind kind);

PlaneKind plane_kind(Layout layout, std::size_t plane);

}  // namespace vidpipe
