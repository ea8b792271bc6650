#include "vidpipe/backend.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vidpipe/errors.hpp"

namespace vidpipe {

using json = nlohmann::json;

// ---------------------------------------------------------------------------------------------------------------------
// FuseBatch

FuseBatch::FuseBatch(int lanes, std::vector<SlotRef> slot_first, std::vector<const FrameStore<LevelHandle> *> levels)
    : lanes_(lanes), slot_first_(std::move(slot_first)), levels_(std::move(levels)) {}

std::span<const LevelHandle> FuseBatch::lanes(int slot, int level) const {
  return levels_.at(std::size_t(level))->lanes(slot_first_.at(std::size_t(slot)), lanes_);
}

const FeatureLevel &FuseBatch::item(int slot, int lane, int level) const {
  const auto &handle = lanes(slot, level)[std::size_t(lane)];
  if (!handle) throw LayoutError("empty store slot for input " + std::to_string(slot) + " lane " + std::to_string(lane));
  return *handle;
}

std::int64_t FuseBatch::frame(int slot, int lane) const {
  const SlotRef s{slot_first_.at(std::size_t(slot)).offset + lane};
  const auto f = levels_.front()->frame_at(s);
  if (!f) throw LayoutError("empty store slot " + std::to_string(s.offset));
  return *f;
}

// ---------------------------------------------------------------------------------------------------------------------
// Built-in backends

namespace {

class HoldBackend : public Backend {
 public:
  HoldBackend(const NetworkDescriptor &d, ColorSpace cs, bool blend) : desc_(d), cs_(cs), blend_(blend) {}

  FeaturePyramid extract(const VideoFrame &frame) override {
    FeatureLevel level;
    level.channels.assign(frame.planes.begin(), frame.planes.end());
    return FeaturePyramid{{std::move(level)}};
  }

  std::vector<std::vector<VideoFrame>> fuse(const FuseBatch &batch) override {
    std::vector<std::vector<VideoFrame>> out(std::size_t(batch.lane_count()));
    const int inputs = batch.slot_count();
    for (int j = 0; j < batch.lane_count(); ++j) {
      auto &lane = out[std::size_t(j)];
      lane.reserve(std::size_t(desc_.outputs_per_run()));
      for (int p = 0; p < desc_.n; ++p) {
        const FeatureLevel &cur = batch.item(p, j, 0);
        if (!desc_.flags.interpolation) {
          lane.push_back(to_frame(cur));
          continue;
        }
        if (desc_.flags.double_frame) lane.push_back(to_frame(cur));
        if (blend_ && p + 1 < inputs) {
          lane.push_back(mix(cur, batch.item(p + 1, j, 0)));
        } else {
          lane.push_back(to_frame(cur));
        }
      }
    }
    return out;
  }

 private:
  VideoFrame to_frame(const FeatureLevel &level) const {
    if (level.channels.size() != 3) throw ShapeError("built-in backends expect 3-channel levels");
    VideoFrame f;
    for (std::size_t c = 0; c < 3; ++c) f.planes[c] = level.channels[c];
    f.width = f.planes[0].width;
    f.height = f.planes[0].height;
    f.format.layout = desc_.pixel_format;
    f.colorspace = cs_;
    return f;
  }

  VideoFrame mix(const FeatureLevel &a, const FeatureLevel &b) const {
    VideoFrame f = to_frame(a);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto &src = b.channels.at(c).data;
      auto &dst = f.planes[c].data;
      if (src.size() != dst.size()) throw ShapeError("blend inputs differ in size");
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = 0.5f * dst[i] + 0.5f * src[i];
    }
    return f;
  }

  NetworkDescriptor desc_;
  ColorSpace cs_;
  bool blend_;
};

void check_builtin(const NetworkDescriptor &d, const char *name) {
  validate_descriptor(d);
  if (!d.scale_x.is_one() || !d.scale_y.is_one()) throw InvalidConfig(std::string(name) + " backend needs scale 1");
  if (d.pyramid_levels != 1) throw InvalidConfig(std::string(name) + " backend produces a single pyramid level");
}

}  // namespace

std::unique_ptr<Backend> identity_backend(const NetworkDescriptor &d, ColorSpace cs) {
  check_builtin(d, "identity");
  return std::make_unique<HoldBackend>(d, cs, false);
}

std::unique_ptr<Backend> blend_backend(const NetworkDescriptor &d, ColorSpace cs) {
  check_builtin(d, "blend");
  if (!d.flags.interpolation) throw InvalidConfig("blend backend needs the interpolation flag");
  return std::make_unique<HoldBackend>(d, cs, true);
}

// ---------------------------------------------------------------------------------------------------------------------
// Registry and manifest

bool is_builtin_model(const std::string &id) { return id == "identity" || id == "blend"; }

BackendRegistry BackendRegistry::with_builtins() {
  BackendRegistry r;
  r.add("identity", [](const BackendDescriptor &d, ColorSpace cs, const std::filesystem::path &) {
    return identity_backend(d.network, cs);
  }, false);
  r.add("blend", [](const BackendDescriptor &d, ColorSpace cs, const std::filesystem::path &) {
    return blend_backend(d.network, cs);
  }, false);
  return r;
}

void BackendRegistry::add(std::string model_id, BackendFactory factory, bool needs_weights) {
  entries_[std::move(model_id)] = Entry{std::move(factory), needs_weights};
}

bool BackendRegistry::needs_weights(const std::string &model_id) const {
  auto it = entries_.find(model_id);
  return it == entries_.end() || it->second.needs_weights;
}

std::unique_ptr<Backend> BackendRegistry::create(const BackendDescriptor &d, ColorSpace cs,
                                                 const std::filesystem::path &weights) const {
  auto it = entries_.find(d.model_id);
  if (it == entries_.end()) throw ManifestError("no engine adapter registered for model_id '" + d.model_id + "'");
  return it->second.factory(d, cs, weights);
}

namespace {

template <class T>
T field(const json &doc, const char *key, const T &fallback, bool required = false) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    if (required) throw ManifestError(std::string("missing field '") + key + "'");
    return fallback;
  }
  try {
    return it->get<T>();
  } catch (const json::exception &) {
    throw ManifestError(std::string("field '") + key + "' has the wrong type");
  }
}

Rational scale_field(const json &doc, const char *key) {
  auto it = doc.find(key);
  if (it == doc.end()) return Rational(1);
  try {
    if (it->is_number_integer()) return Rational(it->get<std::int64_t>());
    if (it->is_string()) return parse_rational(it->get<std::string>());
  } catch (const InvalidConfig &e) {
    throw ManifestError(std::string("field '") + key + "': " + e.what());
  }
  throw ManifestError(std::string("field '") + key + "' must be an integer or a \"p/q\" string");
}

}  // namespace

BackendDescriptor parse_manifest(const std::string &json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw ManifestError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ManifestError("manifest must be a JSON object");

  BackendDescriptor d;
  d.model_id = field<std::string>(doc, "model_id", "", true);
  auto &net = d.network;
  net.n = field<int>(doc, "n", 0, true);
  if (auto flags = doc.find("flags"); flags != doc.end()) {
    if (!flags->is_object()) throw ManifestError("field 'flags' must be an object");
    net.flags.interpolation = field<bool>(*flags, "interpolation", false);
    net.flags.extra_frame = field<bool>(*flags, "extra_frame", false);
    net.flags.double_frame = field<bool>(*flags, "double_frame", false);
  }
  net.scale_x = scale_field(doc, "scale_x");
  net.scale_y = scale_field(doc, "scale_y");
  try {
    net.pixel_format = parse_layout(field<std::string>(doc, "pixel_format", "yuv420"));
  } catch (const InvalidConfig &e) {
    throw ManifestError(e.what());
  }
  net.pyramid_levels = field<int>(doc, "pyramid_levels", 1);
  d.pyramid_channels = field<std::vector<int>>(doc, "pyramid_channels", {});
  d.pyramid_strides = field<std::vector<int>>(doc, "pyramid_strides", {});
  if (!d.pyramid_channels.empty() && int(d.pyramid_channels.size()) != net.pyramid_levels) {
    throw ManifestError("pyramid_levels=" + std::to_string(net.pyramid_levels) + " but " +
                        std::to_string(d.pyramid_channels.size()) + " channel counts declared");
  }
  if (!d.pyramid_strides.empty() && int(d.pyramid_strides.size()) != net.pyramid_levels) {
    throw ManifestError("pyramid_levels=" + std::to_string(net.pyramid_levels) + " but " +
                        std::to_string(d.pyramid_strides.size()) + " strides declared");
  }

  const auto variants = field<std::map<std::string, std::string>>(doc, "variants", {});
  for (const auto &[name, file] : variants) {
    try {
      d.variants[parse_colorspace(name)] = file;
    } catch (const InvalidConfig &e) {
      throw ManifestError(std::string("variants: ") + e.what());
    }
  }
  net.colorspaces.clear();
  if (d.variants.empty()) {
    if (!is_builtin_model(d.model_id)) throw ManifestError("manifest maps no colorspace to a weight file");
    net.colorspaces = {ColorSpace::BT601, ColorSpace::BT709, ColorSpace::BT2020};
  } else {
    for (const auto &entry : d.variants) net.colorspaces.insert(entry.first);
  }

  try {
    validate_descriptor(net);
  } catch (const InvalidConfig &e) {
    throw ManifestError(e.what());
  }
  return d;
}

LoadedBackend load_backend(const std::filesystem::path &model_dir, ColorSpace cs, const BackendRegistry &registry) {
  const auto manifest_path = model_dir / "model.json";
  std::ifstream in(manifest_path);
  if (!in) throw ManifestError("cannot open " + manifest_path.string());
  std::stringstream text;
  text << in.rdbuf();

  LoadedBackend loaded;
  loaded.descriptor = parse_manifest(text.str());
  const auto &d = loaded.descriptor;
  if (!d.network.colorspaces.count(cs)) {
    throw UnsupportedColorspace("model '" + d.model_id + "' has no variant for " + std::string(to_string(cs)));
  }

  std::filesystem::path weights;
  if (auto it = d.variants.find(cs); it != d.variants.end()) {
    weights = model_dir / it->second;
    if (registry.needs_weights(d.model_id) && !std::filesystem::is_regular_file(weights)) {
      throw ManifestError("weight file " + weights.string() + " for " + std::string(to_string(cs)) + " is missing");
    }
  }
  loaded.instance = registry.create(d, cs, weights);
  return loaded;
}

// ---------------------------------------------------------------------------------------------------------------------
// ExtractCache

ExtractCache::Handle ExtractCache::find(std::int64_t frame_index) const {
  auto it = entries_.find(frame_index);
  return it == entries_.end() ? nullptr : it->second;
}

ExtractCache::Handle ExtractCache::insert(std::int64_t frame_index, FeaturePyramid pyramid) {
  auto handle = std::make_shared<const FeaturePyramid>(std::move(pyramid));
  entries_[frame_index] = handle;
  return handle;
}

void ExtractCache::evict_before(std::int64_t frame_index) {
  entries_.erase(entries_.begin(), entries_.lower_bound(frame_index));
}

ExtractCache::Handle extract_with_cache(const VideoFrame &frame, ExtractCache &cache, Backend &backend) {
  if (auto hit = cache.find(frame.frame_index)) return hit;
  cache.count_extract();
  return cache.insert(frame.frame_index, backend.extract(frame));
}

}  // namespace vidpipe
