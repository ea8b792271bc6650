#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <variant>

#include "vidpipe/backend.hpp"
#include "vidpipe/model_desc.hpp"
#include "vidpipe/scene.hpp"
#include "vidpipe/y4m.hpp"

namespace vidpipe {

// Blocking FIFO with a fixed capacity. close() lets consumers drain what is
// left; abort() drops everything and wakes both sides.
template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  bool push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  void abort() {
    std::lock_guard lock(mu_);
    closed_ = true;
    items_.clear();
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
};

struct SceneDetect {
  double threshold = SceneDetector::default_threshold;
};

using SceneSource = std::variant<SceneDetect, SceneList>;

struct PipelineOptions {
  NetworkDescriptor descriptor;
  SceneSource scenes = SceneDetect{};
  std::optional<ColorSpace> colorspace;  // nullopt: pick from frame height
  std::optional<Range> range;            // nullopt: from the Y4M header
  int regions = 2;
  bool force_plain_layout = false;       // disables frame sharing, for comparisons
  // Called on the writer thread for each output frame, in write order.
  std::function<void(std::int64_t presentation, const VideoFrame &)> on_write;
};

struct PipelineStats {
  std::int64_t frames_in = 0;
  std::int64_t frames_out = 0;
  std::int64_t scenes = 0;
  std::int64_t extract_calls = 0;
  std::int64_t shared_batches = 0;
  std::int64_t plain_batches = 0;
  std::int64_t store_copies = 0;
  std::int64_t store_slots = 0;            // allocated per level
  std::int64_t peak_store_occupancy = 0;   // filled slots, per level
  std::int64_t max_shared_batch_items = 0; // distinct slots one shared batch reads
  std::int64_t max_plain_batch_items = 0;
  std::int64_t peak_buffered_frames = 0;   // decoded input frames held by the dispatcher
  std::int64_t peak_cached_pyramids = 0;
  std::int64_t order_violations = 0;
};

// BT.709 for HD and up, BT.601 below 720 lines.
ColorSpace auto_colorspace(int height);

// Output stream header: dimensions scaled, frame rate doubled for
// interpolation, progressive after deinterlacing.
StreamHeader output_header(const StreamHeader &in, const NetworkDescriptor &d);

// Runs the staged engine: reader thread -> dispatcher (this thread) -> writer thread.
// `options.colorspace` must be set.
PipelineStats run_engine(Y4mReader &reader, std::ostream &out, const PipelineOptions &options, Backend &backend);

using BackendProvider = std::function<std::unique_ptr<Backend>(const NetworkDescriptor &, ColorSpace)>;

// Reads the header, resolves colorspace and range, then runs the engine.
PipelineStats run_stream(std::istream &in, std::ostream &out, PipelineOptions options, const BackendProvider &provider);

// Descriptor fields given on the command line.
struct DescriptorOverrides {
  std::optional<int> n;
  std::optional<int> batch;
  std::optional<bool> interpolation;
  std::optional<bool> extra_frame;
  std::optional<bool> double_frame;
  std::optional<Rational> scale_x;
  std::optional<Rational> scale_y;
  std::optional<Layout> pixel_format;
};

struct PipelineConfig {
  std::string input = "-";
  std::string output = "-";
  std::string model = "identity";  // built-in id or model directory
  DescriptorOverrides overrides;
  std::optional<std::filesystem::path> scene_list;
  std::optional<double> scene_threshold;
  std::optional<ColorSpace> colorspace;
  std::optional<Range> range;
  int regions = 2;
};

// Descriptor for a built-in model: defaults plus overrides. The pixel format
// defaults to `container`.
NetworkDescriptor builtin_descriptor(const DescriptorOverrides &o, Layout container);

// Applies overrides to a manifest descriptor; any field that disagrees with
// the manifest is a ConfigError, except batch which the manifest does not fix.
NetworkDescriptor merge_overrides(const NetworkDescriptor &manifest, const DescriptorOverrides &o);

// Whole-file entry point used by the CLI. "-" selects stdin/stdout.
PipelineStats run_pipeline(const PipelineConfig &config);

}  // namespace vidpipe
