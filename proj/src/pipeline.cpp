#include "vidpipe/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "vidpipe/errors.hpp"
#include "vidpipe/framestore.hpp"
#include "vidpipe/grouper.hpp"

namespace vidpipe {

ColorSpace auto_colorspace(int height) { return height >= 720 ? ColorSpace::BT709 : ColorSpace::BT601; }

StreamHeader output_header(const StreamHeader &in, const NetworkDescriptor &d) {
  StreamHeader out = in;
  const auto [w, h] = output_dims(d, in.width, in.height);
  out.width = w;
  out.height = h;
  if (d.flags.interpolation) out.fps.num *= 2;
  if (classify_task(d) == EnhancementTask::Deinterlace) out.interlace = "p";
  return out;
}

namespace {

struct OutputItem {
  std::int64_t presentation;
  VideoFrame frame;
};

// Owns the frame store, the extract cache and the decoded frames of the
// current scene; turns batches into ordered output frames.
class Dispatcher {
 public:
  Dispatcher(const PipelineOptions &opt, Backend &backend, ColorSpace cs, int out_w, int out_h,
             BoundedQueue<OutputItem> &sink, PipelineStats &stats)
      : d_(opt.descriptor),
        opt_(opt),
        backend_(backend),
        cs_(cs),
        out_w_(out_w),
        out_h_(out_h),
        sink_(sink),
        stats_(stats),
        layout_{d_.n, d_.batch, opt.regions},
        batcher_(d_) {
    if (opt.regions < 2) throw InvalidConfig("frame store needs at least 2 regions");
    const bool sharing = d_.flags.interpolation && d_.flags.extra_frame && !opt.force_plain_layout;
    const std::int64_t slots = std::max(sharing ? layout_.shared_slots() : 0, layout_.plain_slots(d_.input_count()));
    stats_.store_slots = slots;
    for (int l = 0; l < d_.pyramid_levels; ++l) stores_.emplace_back(slots);
    if (auto *detect = std::get_if<SceneDetect>(&opt.scenes)) detector_.emplace(detect->threshold);
  }

  void push(VideoFrame frame) {
    const std::int64_t index = frame.frame_index;
    if (starts_scene(frame) && index > 0) finish_scene();
    raw_.emplace(index, std::move(frame));
    stats_.peak_buffered_frames = std::max<std::int64_t>(stats_.peak_buffered_frames, std::int64_t(raw_.size()));
    ++scene_length_;
    for (auto &batch : batcher_.grow(scene_length_)) dispatch(batch);
  }

  void finish(std::int64_t total) {
    if (total == 0) return;
    if (auto *list = std::get_if<SceneList>(&opt_.scenes)) scene_spans(*list, total);
    finish_scene();
  }

 private:
  // Every frame goes through the detector so it always holds the previous one.
  bool starts_scene(const VideoFrame &frame) {
    if (auto *list = std::get_if<SceneList>(&opt_.scenes)) return list->is_start(frame.frame_index);
    return detector_->push(frame);
  }

  void finish_scene() {
    for (auto &batch : batcher_.finish(scene_length_)) dispatch(batch);
    ++stats_.scenes;
    scene_start_ += scene_length_;
    scene_length_ = 0;
    raw_.clear();
    cache_.clear();
    for (auto &s : stores_) s.clear();
    ring_valid_ = false;
  }

  ExtractCache::Handle pyramid_for(std::int64_t index) {
    if (auto hit = cache_.find(index)) return hit;
    auto it = raw_.find(index);
    if (it == raw_.end()) throw LayoutError("frame " + std::to_string(index) + " was released before extraction");
    VideoFrame input = convert_layout(it->second, d_.pixel_format, cs_);
    auto handle = extract_with_cache(input, cache_, backend_);
    ++stats_.extract_calls;
    if (int(handle->levels.size()) != d_.pyramid_levels) {
      throw ShapeError("extract returned " + std::to_string(handle->levels.size()) + " levels, descriptor declares " +
                       std::to_string(d_.pyramid_levels));
    }
    stats_.peak_cached_pyramids = std::max<std::int64_t>(stats_.peak_cached_pyramids, std::int64_t(cache_.size()));
    return handle;
  }

  void place(SlotRef slot, std::int64_t index) {
    auto pyramid = pyramid_for(index);
    for (std::size_t l = 0; l < stores_.size(); ++l) {
      stores_[l].put(slot, index, LevelHandle(pyramid, &pyramid->levels[l]));
    }
  }

  void dispatch(const Batch &batch) {
    const int b = d_.batch;
    cache_.evict_before(scene_start_ + batch.first_frame());

    std::vector<SlotRef> slot_first(std::size_t(d_.input_count()));
    const bool shared = batch.shared && !opt_.force_plain_layout;
    if (shared) {
      const std::int64_t f0 = scene_start_ + batch.first_frame();
      if (!ring_valid_ || ring_next_f0_ != f0) {
        for (auto &s : stores_) s.clear();
        region_ = 0;
      }
      const std::int64_t base = layout_.region_base(region_);
      auto placed = shared_placement(batch, region_, layout_);
      std::sort(placed.begin(), placed.end(), [](const Placement &a, const Placement &b) { return a.frame < b.frame; });
      for (const auto &p : placed) {
        const std::int64_t index = scene_start_ + p.frame;
        if (p.slot.offset == base && stores_.front().frame_at(p.slot) == index) continue;  // carried by the copy
        place(p.slot, index);
      }
      for (int k = 0; k < d_.input_count(); ++k) slot_first[std::size_t(k)] = shared_slot_offset(k, 0, region_, layout_);
      ++stats_.shared_batches;
    } else {
      for (auto &s : stores_) s.clear();
      ring_valid_ = false;
      for (int j = 0; j < b; ++j) {
        for (const auto &p : place_plain(batch.lanes[std::size_t(j)], j, b, stores_.front().size())) {
          place(p.slot, scene_start_ + p.frame);
        }
      }
      for (int k = 0; k < d_.input_count(); ++k) slot_first[std::size_t(k)] = plain_slot_offset(k, 0, b);
      ++stats_.plain_batches;
    }
    std::set<std::int64_t> read;
    for (const auto &first : slot_first)
      for (int j = 0; j < b; ++j) read.insert(first.offset + j);
    auto &items = shared ? stats_.max_shared_batch_items : stats_.max_plain_batch_items;
    items = std::max(items, std::int64_t(read.size()));
    stats_.peak_store_occupancy = std::max(stats_.peak_store_occupancy, stores_.front().occupied());

    std::vector<const FrameStore<LevelHandle> *> levels;
    for (const auto &s : stores_) levels.push_back(&s);
    const FuseBatch view(b, std::move(slot_first), std::move(levels));
    auto outputs = backend_.fuse(view);
    check_outputs(outputs);

    if (shared) {
      const auto copy = advance_region(region_, layout_);
      for (auto &s : stores_) s.copy(copy);
      ++stats_.store_copies;
      region_ = (region_ + 1) % layout_.regions;
      ring_next_f0_ = scene_start_ + batch.first_frame() + std::int64_t(b) * d_.n;
      ring_valid_ = true;
    }

    FrameRef fresh_end = 0;
    for (int j = 0; j < batch.real_lanes; ++j) {
      const Run &run = batch.lanes[std::size_t(j)];
      for (const auto &entry : schedule_run(run, d_, presentation_)) {
        VideoFrame frame;
        if (entry.source.kind == OutputSource::Kind::PassThrough) {
          frame = raw_.at(scene_start_ + run.inputs[std::size_t(entry.source.index)]);
        } else {
          frame = outputs[std::size_t(j)][std::size_t(entry.source.index)];
        }
        frame.frame_index = entry.presentation;
        frame.colorspace = cs_;
        if (!sink_.push({entry.presentation, std::move(frame)})) throw IoError("output stage stopped");
        ++presentation_;
      }
      fresh_end = std::max(fresh_end, run.fresh_start + run.fresh_count);
    }

    // Anything before the fresh end is either emitted or already extracted.
    raw_.erase(raw_.begin(), raw_.lower_bound(scene_start_ + fresh_end));
  }

  void check_outputs(const std::vector<std::vector<VideoFrame>> &outputs) const {
    if (int(outputs.size()) != d_.batch) {
      throw ShapeError("fuse returned " + std::to_string(outputs.size()) + " lanes, batch is " +
                       std::to_string(d_.batch));
    }
    for (const auto &lane : outputs) {
      if (int(lane.size()) != d_.outputs_per_run()) {
        throw ShapeError("fuse returned " + std::to_string(lane.size()) + " frames per lane, expected " +
                         std::to_string(d_.outputs_per_run()));
      }
      for (const auto &f : lane) {
        if (f.width != out_w_ || f.height != out_h_ || f.format.layout != d_.pixel_format) {
          throw ShapeError("fuse produced a " + std::to_string(f.width) + "x" + std::to_string(f.height) + " " +
                           std::string(to_string(f.format.layout)) + " frame, expected " + std::to_string(out_w_) +
                           "x" + std::to_string(out_h_) + " " + std::string(to_string(d_.pixel_format)));
        }
      }
    }
  }

  const NetworkDescriptor &d_;
  const PipelineOptions &opt_;
  Backend &backend_;
  ColorSpace cs_;
  int out_w_;
  int out_h_;
  BoundedQueue<OutputItem> &sink_;
  PipelineStats &stats_;

  StoreLayout layout_;
  SceneBatcher batcher_;
  std::optional<SceneDetector> detector_;
  std::vector<FrameStore<LevelHandle>> stores_;
  ExtractCache cache_;
  std::map<std::int64_t, VideoFrame> raw_;

  std::int64_t scene_start_ = 0;
  std::int64_t scene_length_ = 0;
  std::int64_t presentation_ = 0;
  int region_ = 0;
  bool ring_valid_ = false;
  std::int64_t ring_next_f0_ = 0;
};

// Joins a worker on scope exit after aborting the queues it may block on.
class StageGuard {
 public:
  StageGuard(std::thread &t, std::function<void()> on_abort) : t_(t), on_abort_(std::move(on_abort)) {}
  ~StageGuard() {
    if (t_.joinable()) {
      on_abort_();
      t_.join();
    }
  }

 private:
  std::thread &t_;
  std::function<void()> on_abort_;
};

}  // namespace

PipelineStats run_engine(Y4mReader &reader, std::ostream &out, const PipelineOptions &options, Backend &backend) {
  const NetworkDescriptor &d = options.descriptor;
  validate_descriptor(d);
  if (!options.colorspace) throw ConfigError("run_engine needs a resolved colorspace");
  const ColorSpace cs = *options.colorspace;
  if (!d.colorspaces.count(cs)) {
    throw UnsupportedColorspace("network has no variant for " + std::string(to_string(cs)));
  }

  StreamHeader in_header = reader.header();
  if (options.range && *options.range != in_header.format.range) {
    reader.set_range(*options.range);
    in_header.set_range(*options.range);
  }
  const StreamHeader out_header = output_header(in_header, d);
  try {
    chroma_dims(out_header.format.layout, out_header.width, out_header.height);
    chroma_dims(d.pixel_format, in_header.width, in_header.height);
  } catch (const DimensionError &e) {
    throw ConfigError(std::string("no conversion path between container and network format: ") + e.what());
  }

  PipelineStats stats;
  const std::size_t window = std::size_t(d.n) * std::size_t(d.batch);
  BoundedQueue<VideoFrame> inbox(window);
  BoundedQueue<OutputItem> outbox(window * std::size_t(d.outputs_per_run()) + 2);

  std::exception_ptr reader_error;
  std::thread reader_thread([&] {
    try {
      while (auto f = reader.next()) {
        if (!inbox.push(std::move(*f))) return;
      }
    } catch (...) {
      reader_error = std::current_exception();
    }
    inbox.close();
  });
  StageGuard reader_guard(reader_thread, [&] { inbox.abort(); });

  std::exception_ptr writer_error;
  std::thread writer_thread([&] {
    try {
      Y4mWriter writer(out, out_header);
      std::int64_t expected = 0;
      while (auto item = outbox.pop()) {
        if (item->presentation != expected) ++stats.order_violations;
        expected = item->presentation + 1;
        VideoFrame frame = convert_layout(item->frame, out_header.format.layout, cs);
        frame.format = out_header.format;
        writer.write(frame);
        if (options.on_write) options.on_write(item->presentation, frame);
        ++stats.frames_out;
      }
      out.flush();
    } catch (...) {
      writer_error = std::current_exception();
      outbox.abort();
    }
  });
  StageGuard writer_guard(writer_thread, [&] { outbox.abort(); });

  try {
    Dispatcher dispatcher(options, backend, cs, out_header.width, out_header.height, outbox, stats);
    while (auto frame = inbox.pop()) {
      ++stats.frames_in;
      dispatcher.push(std::move(*frame));
    }
    reader_thread.join();
    if (reader_error) std::rethrow_exception(reader_error);
    dispatcher.finish(stats.frames_in);
  } catch (...) {
    inbox.abort();
    outbox.abort();
    if (writer_thread.joinable()) writer_thread.join();
    if (writer_error) std::rethrow_exception(writer_error);
    throw;
  }

  outbox.close();
  writer_thread.join();
  if (writer_error) std::rethrow_exception(writer_error);
  return stats;
}

PipelineStats run_stream(std::istream &in, std::ostream &out, PipelineOptions options,
                         const BackendProvider &provider) {
  Y4mReader reader(in);
  if (!options.colorspace) options.colorspace = auto_colorspace(reader.header().height);
  reader.set_colorspace(*options.colorspace);
  auto backend = provider(options.descriptor, *options.colorspace);
  return run_engine(reader, out, options, *backend);
}

// ---------------------------------------------------------------------------------------------------------------------
// Configuration

NetworkDescriptor builtin_descriptor(const DescriptorOverrides &o, Layout container) {
  NetworkDescriptor d;
  d.n = o.n.value_or(1);
  d.batch = o.batch.value_or(1);
  d.flags.interpolation = o.interpolation.value_or(false);
  d.flags.extra_frame = o.extra_frame.value_or(false);
  d.flags.double_frame = o.double_frame.value_or(false);
  d.scale_x = o.scale_x.value_or(Rational(1));
  d.scale_y = o.scale_y.value_or(Rational(1));
  d.pixel_format = o.pixel_format.value_or(container);
  validate_descriptor(d);
  return d;
}

namespace {

template <class T, class Show>
void agree(const std::optional<T> &given, const T &manifest, const char *name, Show show) {
  if (given && !(*given == manifest)) {
    throw ConfigError(std::string("--") + name + " " + show(*given) + " conflicts with the model manifest (" +
                      show(manifest) + ")");
  }
}

}  // namespace

NetworkDescriptor merge_overrides(const NetworkDescriptor &manifest, const DescriptorOverrides &o) {
  const auto num = [](auto v) { return std::to_string(v); };
  const auto flag = [](bool v) { return std::string(v ? "on" : "off"); };
  const auto rat = [](const Rational &r) { return r.to_string(); };
  const auto fmt = [](Layout l) { return std::string(to_string(l)); };
  agree(o.n, manifest.n, "n", num);
  agree(o.interpolation, manifest.flags.interpolation, "interpolation", flag);
  agree(o.extra_frame, manifest.flags.extra_frame, "extra-frame", flag);
  agree(o.double_frame, manifest.flags.double_frame, "double-frame", flag);
  agree(o.scale_x, manifest.scale_x, "scale-x", rat);
  agree(o.scale_y, manifest.scale_y, "scale-y", rat);
  agree(o.pixel_format, manifest.pixel_format, "pixel-format", fmt);
  NetworkDescriptor d = manifest;
  d.batch = o.batch.value_or(manifest.batch);
  validate_descriptor(d);
  return d;
}

PipelineStats run_pipeline(const PipelineConfig &config) {
  const bool builtin = is_builtin_model(config.model);
  if (config.scene_list && config.scene_threshold) {
    throw ConfigError("--scene-list and --scene-detect-threshold are mutually exclusive");
  }
  if (builtin) builtin_descriptor(config.overrides, Layout::YUV420);  // fail fast on flag combinations

  PipelineOptions options;
  if (config.scene_list) {
    std::ifstream list(*config.scene_list);
    if (!list) throw IoError("cannot open scene list " + config.scene_list->string());
    options.scenes = parse_scene_list(list);
  } else {
    SceneDetector check(config.scene_threshold.value_or(SceneDetector::default_threshold));
    options.scenes = SceneDetect{check.threshold()};
  }
  options.range = config.range;
  options.regions = config.regions;

  std::ifstream in_file;
  if (config.input != "-") {
    in_file.open(config.input, std::ios::binary);
    if (!in_file) throw IoError("cannot open input " + config.input);
  }
  std::istream &in = config.input == "-" ? std::cin : in_file;
  Y4mReader reader(in);

  const ColorSpace cs = config.colorspace.value_or(auto_colorspace(reader.header().height));
  reader.set_colorspace(cs);
  options.colorspace = cs;

  std::unique_ptr<Backend> backend;
  if (builtin) {
    options.descriptor = builtin_descriptor(config.overrides, reader.header().format.layout);
    backend = config.model == "identity" ? identity_backend(options.descriptor, cs)
                                         : blend_backend(options.descriptor, cs);
  } else {
    auto loaded = load_backend(config.model, cs);
    options.descriptor = merge_overrides(loaded.descriptor.network, config.overrides);
    backend = std::move(loaded.instance);
  }

  std::ofstream out_file;
  if (config.output != "-") {
    out_file.open(config.output, std::ios::binary | std::ios::trunc);
    if (!out_file) throw IoError("cannot open output " + config.output);
  }
  std::ostream &out = config.output == "-" ? std::cout : out_file;
  auto stats = run_engine(reader, out, options, *backend);
  if (config.output != "-") {
    out_file.close();
    if (!out_file) throw IoError("failed to finish writing " + config.output);
  }
  return stats;
}

}  // namespace vidpipe
