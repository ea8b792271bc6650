#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "vidpipe/color.hpp"

namespace vidpipe {

// Positive rational, kept in lowest terms.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_one() const { return num_ == den_; }

  // Exact product with an integer; throws InvalidConfig when not integral.
  std::int64_t scale(std::int64_t value, std::string_view what) const;

  std::string to_string() const;

  friend bool operator==(const Rational &, const Rational &) = default;
  friend bool operator<(const Rational &a, const Rational &b) { return a.num_ * b.den_ < b.num_ * a.den_; }
  friend bool operator>(const Rational &a, const Rational &b) { return b < a; }

 private:
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

// "2", "3/2" or "1.5".
Rational parse_rational(std::string_view text);

struct NetworkFlags {
  bool interpolation = false;
  bool extra_frame = false;
  bool double_frame = false;

  friend bool operator==(const NetworkFlags &, const NetworkFlags &) = default;
};

struct NetworkDescriptor {
  int n = 1;
  NetworkFlags flags;
  Rational scale_x;
  Rational scale_y;
  int batch = 1;
  Layout pixel_format = Layout::YUV420;
  std::set<ColorSpace> colorspaces{ColorSpace::BT601, ColorSpace::BT709, ColorSpace::BT2020};
  int pyramid_levels = 1;

  int input_count() const { return n + (flags.extra_frame ? 1 : 0); }
  int outputs_per_run() const { return flags.double_frame ? 2 * n : n; }
};

enum class EnhancementTask {
  Denoise,
  SuperResolution,
  Deinterlace,
  Interpolation,
  InterpolationWithDenoise,
  SpatioTemporalSR,
};

std::string_view to_string(EnhancementTask task);

// Throws InvalidConfig naming the first violated invariant.
void validate_descriptor(const NetworkDescriptor &d);

EnhancementTask classify_task(const NetworkDescriptor &d);

// Output dimensions for an input stream; throws InvalidConfig when the
// scaled size is fractional.
std::pair<int, int> output_dims(const NetworkDescriptor &d, int width, int height);

}  // namespace vidpipe
