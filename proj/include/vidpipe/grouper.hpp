#pragma once

#include <cstdint>
#include <vector>

#include "vidpipe/model_desc.hpp"

namespace vidpipe {

// Scene-relative frame index.
using FrameRef = std::int64_t;

// One inference invocation. `inputs` has input_count() entries; the fresh
// interval [fresh_start, fresh_start + fresh_count) is the set of frames
// whose outputs this run emits.
struct Run {
  std::vector<FrameRef> inputs;
  FrameRef fresh_start = 0;
  int fresh_count = 0;

  // Position in `inputs` of the first fresh frame.
  int fresh_position() const { return int(fresh_start - inputs.front()); }

  friend bool operator==(const Run &, const Run &) = default;
};

struct RunPlan {
  std::vector<Run> runs;
  int n = 1;
  NetworkFlags flags;
};

// Run `index` of a scene known to extend past frame (index+1)*n - 1 + lookahead.
Run regular_run(std::int64_t index, const NetworkDescriptor &d);

// ceil(m/n) runs. The final run recycles trailing frames of the previous run
// when m >= n, or repeats frame m-1 when m < n; an extra_frame lookahead at
// scene end repeats frame m-1.
RunPlan plan_scene(std::int64_t m, const NetworkDescriptor &d);

struct OutputSource {
  enum class Kind { Network, PassThrough };
  Kind kind;
  int index;  // network output slot, or input position for pass-through

  friend bool operator==(const OutputSource &, const OutputSource &) = default;
};

struct ScheduledOutput {
  OutputSource source;
  std::int64_t presentation;

  friend bool operator==(const ScheduledOutput &, const ScheduledOutput &) = default;
};

using RunSchedule = std::vector<ScheduledOutput>;

struct OutputSchedule {
  std::vector<RunSchedule> runs;
};

// Output frames contributed by each fresh input frame: 2 for interpolation, else 1.
int outputs_per_fresh_frame(const NetworkFlags &flags);

// Which network outputs (or pass-through inputs) of `run` are emitted and at
// which presentation index. Outputs of recycled and padded positions are dropped.
RunSchedule schedule_run(const Run &run, const NetworkDescriptor &d, std::int64_t base_presentation);
OutputSchedule schedule_outputs(const RunPlan &plan, const NetworkDescriptor &d, std::int64_t base_presentation);

struct Batch {
  std::vector<Run> lanes;  // always exactly b entries
  int real_lanes = 0;      // lanes past this are padding with fresh_count 0
  bool shared = false;     // eligible for the shared frame-store layout

  FrameRef first_frame() const { return lanes.front().inputs.front(); }
};

// A run that consumes exactly [s, s+n) with s a multiple of n, emits all of
// them, and (with extra_frame) looks ahead to a distinct frame s+n.
bool is_stride_aligned(const Run &run, int n, const NetworkFlags &flags);

// Packs runs in order into batches of exactly b lanes. A batch is shared
// when flags are interpolation + extra_frame and all b lanes are real,
// stride-aligned, and consecutive.
std::vector<Batch> plan_batches(const RunPlan &plan, int b);

// Incremental form of plan_scene + plan_batches for streams whose scene
// length is only known when the scene ends. Batches come out in the same
// order and with the same content as plan_batches(plan_scene(m), b).
class SceneBatcher {
 public:
  explicit SceneBatcher(const NetworkDescriptor &d);

  // The scene now holds `length` frames and continues; returns batches
  // that can no longer change.
  std::vector<Batch> grow(std::int64_t length);

  // The scene ended with `length` frames.
  std::vector<Batch> finish(std::int64_t length);

  // Frames that must be buffered past a batch's first frame before it is released.
  std::int64_t window() const;

 private:
  NetworkDescriptor desc_;
  std::size_t emitted_ = 0;
};

}  // namespace vidpipe
