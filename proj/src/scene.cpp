#include "vidpipe/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "vidpipe/errors.hpp"

namespace vidpipe {

SceneList::SceneList(std::vector<std::int64_t> starts) {
  for (auto s : starts) {
    if (s < 0) throw RangeError("negative scene start " + std::to_string(s));
  }
  starts.push_back(0);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  starts_ = std::move(starts);
}

bool SceneList::is_start(std::int64_t frame) const {
  return std::binary_search(starts_.begin(), starts_.end(), frame);
}

SceneList parse_scene_list(std::istream &in) {
  std::vector<std::int64_t> starts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view token(line.data() + first, last - first + 1);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size()) {
      throw ParseError(line_no, "not a frame index: '" + std::string(token) + "'");
    }
    if (v < 0) throw RangeError("negative scene start " + std::to_string(v) + " on line " + std::to_string(line_no));
    starts.push_back(v);
  }
  return SceneList(std::move(starts));
}

std::vector<FrameSpan> scene_spans(const SceneList &scenes, std::int64_t total) {
  if (total < 1) throw RangeError("stream has no frames");
  const auto &starts = scenes.starts();
  if (starts.back() >= total) {
    throw RangeError("scene start " + std::to_string(starts.back()) + " is beyond the last frame " +
                     std::to_string(total - 1));
  }
  std::vector<FrameSpan> spans;
  spans.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    spans.push_back({starts[i], i + 1 < starts.size() ? starts[i + 1] : total});
  }
  return spans;
}

Plane luma_plane(const VideoFrame &f) {
  if (f.format.layout != Layout::RGB) return f.planes[0];
  Plane y(f.width, f.height);
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    y.data[i] = float(0.299 * f.planes[0].data[i] + 0.587 * f.planes[1].data[i] + 0.114 * f.planes[2].data[i]);
  }
  return y;
}

namespace {

double mad(const Plane &a, const Plane &b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) sum += std::abs(double(a.data[i]) - double(b.data[i]));
  return a.data.empty() ? 0.0 : sum / double(a.data.size());
}

}  // namespace

double mean_abs_luma_diff(const VideoFrame &a, const VideoFrame &b) {
  if (a.width != b.width || a.height != b.height || a.format.layout != b.format.layout) {
    throw FormatMismatch("frames differ in size or format");
  }
  return mad(luma_plane(a), luma_plane(b));
}

SceneDetector::SceneDetector(double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw InvalidConfig("scene detect threshold must be in (0,1], got " + std::to_string(threshold));
  }
}

bool SceneDetector::push(const VideoFrame &f) {
  Plane y = luma_plane(f);
  bool cut = false;
  if (previous_) {
    if (previous_->width != y.width || previous_->height != y.height || !(format_ == f.format)) {
      throw FormatMismatch("frame " + std::to_string(f.frame_index) + " changes size or format mid-stream");
    }
    cut = mad(*previous_, y) > threshold_;
  }
  previous_ = std::move(y);
  format_ = f.format;
  return cut;
}

SceneList detect_scene_changes(std::span<const VideoFrame> frames, double threshold) {
  SceneDetector detector(threshold);
  std::vector<std::int64_t> starts;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (detector.push(frames[i])) starts.push_back(std::int64_t(i));
  }
  return SceneList(std::move(starts));
}

}  // namespace vidpipe
