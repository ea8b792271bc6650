#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vidpipe/color.hpp"
#include "vidpipe/framestore.hpp"
#include "vidpipe/model_desc.hpp"

namespace vidpipe {

// One pyramid level: a list of channel planes. Channels may differ in size
// (a 4:2:0 frame wrapped as a level has half-size chroma channels).
struct FeatureLevel {
  std::vector<Plane> channels;
};

struct FeaturePyramid {
  std::vector<FeatureLevel> levels;
};

using LevelHandle = std::shared_ptr<const FeatureLevel>;

// Read-only view of one batch as the fusion stage sees it: for every input
// slot and pyramid level, the b lanes sit in consecutive store slots.
class FuseBatch {
 public:
  FuseBatch(int lanes, std::vector<SlotRef> slot_first, std::vector<const FrameStore<LevelHandle> *> levels);

  int slot_count() const { return int(slot_first_.size()); }
  int lane_count() const { return lanes_; }
  int level_count() const { return int(levels_.size()); }

  std::span<const LevelHandle> lanes(int slot, int level) const;
  const FeatureLevel &item(int slot, int lane, int level) const;
  // Stream index of the frame in (slot, lane).
  std::int64_t frame(int slot, int lane) const;

 private:
  int lanes_;
  std::vector<SlotRef> slot_first_;
  std::vector<const FrameStore<LevelHandle> *> levels_;
};

// Two-stage inference contract. extract() sees one frame at a time and keeps
// no cross-frame state; fuse() maps a batch of input groups to
// outputs_per_run() frames per lane, in presentation order, sized
// (W*sx, H*sy) in the descriptor's pixel format. Both must be deterministic.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual FeaturePyramid extract(const VideoFrame &frame) = 0;
  virtual std::vector<std::vector<VideoFrame>> fuse(const FuseBatch &batch) = 0;
};

struct BackendDescriptor {
  NetworkDescriptor network;
  std::string model_id;
  std::map<ColorSpace, std::string> variants;  // colorspace -> weight file name
  std::vector<int> pyramid_channels;           // empty: undeclared
  std::vector<int> pyramid_strides;            // empty: 1, 2, 4, ...
};

// Frames held verbatim: intermediate(p, p+1) is frame p, double-frame
// enhanced outputs are the inputs.
std::unique_ptr<Backend> identity_backend(const NetworkDescriptor &d, ColorSpace cs);

// intermediate(p, p+1) = (frame p + frame p+1) / 2. Requires interpolation.
std::unique_ptr<Backend> blend_backend(const NetworkDescriptor &d, ColorSpace cs);

using BackendFactory = std::function<std::unique_ptr<Backend>(const BackendDescriptor &, ColorSpace cs,
                                                              const std::filesystem::path &weights)>;

// model_id -> factory. Built-in ids need no weight file; anything else is an
// engine adapter registered by the embedding application.
class BackendRegistry {
 public:
  static BackendRegistry with_builtins();

  void add(std::string model_id, BackendFactory factory, bool needs_weights = true);
  bool contains(const std::string &model_id) const { return entries_.count(model_id) != 0; }
  bool needs_weights(const std::string &model_id) const;
  std::unique_ptr<Backend> create(const BackendDescriptor &d, ColorSpace cs, const std::filesystem::path &weights) const;

 private:
  struct Entry {
    BackendFactory factory;
    bool needs_weights;
  };
  std::unordered_map<std::string, Entry> entries_;
};

bool is_builtin_model(const std::string &id);

// Parses a model.json document. Throws ManifestError.
BackendDescriptor parse_manifest(const std::string &json_text);

struct LoadedBackend {
  std::unique_ptr<Backend> instance;
  BackendDescriptor descriptor;
};

// Reads model_dir/model.json, selects the variant for cs and instantiates it.
// Throws ManifestError, UnsupportedColorspace.
LoadedBackend load_backend(const std::filesystem::path &model_dir, ColorSpace cs,
                           const BackendRegistry &registry = BackendRegistry::with_builtins());

// Index-keyed pyramid cache: each stream frame is extracted at most once
// while it stays inside the window.
class ExtractCache {
 public:
  using Handle = std::shared_ptr<const FeaturePyramid>;

  Handle find(std::int64_t frame_index) const;
  Handle insert(std::int64_t frame_index, FeaturePyramid pyramid);
  void evict_before(std::int64_t frame_index);
  void clear() { entries_.clear(); }

  std::size_t size() const { return entries_.size(); }
  std::int64_t extract_calls() const { return extract_calls_; }
  void count_extract() { ++extract_calls_; }

 private:
  std::map<std::int64_t, Handle> entries_;
  std::int64_t extract_calls_ = 0;
};

// Cached pyramid for frame.frame_index, calling backend.extract on a miss.
ExtractCache::Handle extract_with_cache(const VideoFrame &frame, ExtractCache &cache, Backend &backend);

}  // namespace vidpipe
