#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <vector>

#include "vidpipe/color.hpp"

namespace vidpipe {

// Sorted scene-start frame indices; always begins with 0.
class SceneList {
 public:
  SceneList() = default;
  // Adds the implicit 0, sorts and deduplicates. Throws RangeError on negatives.
  explicit SceneList(std::vector<std::int64_t> starts);

  const std::vector<std::int64_t> &starts() const { return starts_; }
  bool is_start(std::int64_t frame) const;

  friend bool operator==(const SceneList &, const SceneList &) = default;

 private:
  std::vector<std::int64_t> starts_{0};
};

struct FrameSpan {
  std::int64_t begin;
  std::int64_t end;  // exclusive

  std::int64_t size() const { return end - begin; }
  friend bool operator==(const FrameSpan &, const FrameSpan &) = default;
};

// One decimal index per line; blank lines and '#' lines are skipped.
SceneList parse_scene_list(std::istream &in);

std::vector<FrameSpan> scene_spans(const SceneList &scenes, std::int64_t total);

// The Y plane, or 0.299/0.587/0.114-weighted RGB.
Plane luma_plane(const VideoFrame &f);

// Mean absolute luma difference on the normalized scale.
double mean_abs_luma_diff(const VideoFrame &a, const VideoFrame &b);

// Streaming detector; holds only the previous frame's luma.
class SceneDetector {
 public:
  static constexpr double default_threshold = 0.15;

  explicit SceneDetector(double threshold = default_threshold);

  // True when f (not the first frame) starts a new scene.
  bool push(const VideoFrame &f);

  double threshold() const { return threshold_; }

 private:
  double threshold_;
  std::optional<Plane> previous_;
  PixelFormat format_;
};

SceneList detect_scene_changes(std::span<const VideoFrame> frames, double threshold);

}  // namespace vidpipe
