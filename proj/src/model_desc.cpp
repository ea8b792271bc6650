#include "vidpipe/model_desc.hpp"

#include <charconv>
#include <numeric>

#include "vidpipe/errors.hpp"

namespace vidpipe {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0) {
    throw InvalidConfig("scale factor must be positive, got " + std::to_string(num) + "/" + std::to_string(den));
  }
  const auto g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

std::int64_t Rational::scale(std::int64_t value, std::string_view what) const {
  if ((value * num_) % den_ != 0) {
    throw InvalidConfig(std::string(what) + " " + std::to_string(value) + " scaled by " + to_string() +
                        " is not integral");
  }
  return value * num_ / den_;
}

std::string Rational::to_string() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

namespace {

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t v = 0;
  const auto *end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || text.empty()) {
    throw InvalidConfig("malformed scale factor '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return {parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text)};
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto frac = text.substr(dot + 1);
    if (frac.size() > 9) throw InvalidConfig("too many decimals in '" + std::string(text) + "'");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const auto whole = dot == 0 ? 0 : parse_int(text.substr(0, dot), text);
    const auto part = frac.empty() ? 0 : parse_int(frac, text);
    return {whole * den + part, den};
  }
  return {parse_int(text, text), 1};
}

std::string_view to_string(EnhancementTask task) {
  switch (task) {
    case EnhancementTask::Denoise: return "denoise";
    case EnhancementTask::SuperResolution: return "super-resolution";
    case EnhancementTask::Deinterlace: return "deinterlace";
    case EnhancementTask::Interpolation: return "interpolation";
    case EnhancementTask::InterpolationWithDenoise: return "interpolation+denoise";
    case EnhancementTask::SpatioTemporalSR: return "spatio-temporal-sr";
  }
  return "?";
}

void validate_descriptor(const NetworkDescriptor &d) {
  if (d.n < 1) throw InvalidConfig("n must be >= 1");
  if (d.batch < 1) throw InvalidConfig("batch must be >= 1");
  if (d.pyramid_levels < 1) throw InvalidConfig("pyramid_levels must be >= 1");
  if (d.colorspaces.empty()) throw InvalidConfig("descriptor lists no colorspace");
  if (d.flags.double_frame && !d.flags.interpolation) {
    throw InvalidConfig("double_frame requires interpolation");
  }
  if (d.flags.interpolation && !d.flags.double_frame && !(d.scale_x.is_one() && d.scale_y.is_one())) {
    throw InvalidConfig("interpolation without double_frame passes input frames through, so scale must be 1");
  }
}

EnhancementTask classify_task(const NetworkDescriptor &d) {
  const bool unit = d.scale_x.is_one() && d.scale_y.is_one();
  if (d.flags.interpolation) {
    if (!d.flags.double_frame) return EnhancementTask::Interpolation;
    return unit ? EnhancementTask::InterpolationWithDenoise : EnhancementTask::SpatioTemporalSR;
  }
  if (unit) return EnhancementTask::Denoise;
  if (d.scale_x.is_one() && d.scale_y == Rational(2)) return EnhancementTask::Deinterlace;
  return EnhancementTask::SuperResolution;
}

std::pair<int, int> output_dims(const NetworkDescriptor &d, int width, int height) {
  return {int(d.scale_x.scale(width, "width")), int(d.scale_y.scale(height, "height"))};
}

}  // namespace vidpipe
