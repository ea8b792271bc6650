#include "vidpipe/grouper.hpp"

#include <algorithm>

#include "vidpipe/errors.hpp"

namespace vidpipe {

Run regular_run(std::int64_t index, const NetworkDescriptor &d) {
  Run run;
  const std::int64_t start = index * d.n;
  run.inputs.reserve(std::size_t(d.input_count()));
  for (int k = 0; k < d.n; ++k) run.inputs.push_back(start + k);
  if (d.flags.extra_frame) run.inputs.push_back(start + d.n);
  run.fresh_start = start;
  run.fresh_count = d.n;
  return run;
}

RunPlan plan_scene(std::int64_t m, const NetworkDescriptor &d) {
  if (m < 1) throw RangeError("scene length must be >= 1");
  RunPlan plan;
  plan.n = d.n;
  plan.flags = d.flags;
  const std::int64_t n = d.n;
  const std::int64_t runs = (m + n - 1) / n;
  plan.runs.reserve(std::size_t(runs));
  for (std::int64_t i = 0; i + 1 < runs; ++i) plan.runs.push_back(regular_run(i, d));

  const std::int64_t rem = m - (runs - 1) * n;
  Run last;
  last.inputs.reserve(std::size_t(d.input_count()));
  if (m >= n) {
    for (std::int64_t f = m - n; f < m; ++f) last.inputs.push_back(f);
    last.fresh_start = m - rem;
    last.fresh_count = int(rem);
  } else {
    for (std::int64_t k = 0; k < n; ++k) last.inputs.push_back(std::min(k, m - 1));
    last.fresh_start = 0;
    last.fresh_count = int(m);
  }
  if (d.flags.extra_frame) last.inputs.push_back(m - 1);
  plan.runs.push_back(std::move(last));
  return plan;
}

int outputs_per_fresh_frame(const NetworkFlags &flags) { return flags.interpolation ? 2 : 1; }

RunSchedule schedule_run(const Run &run, const NetworkDescriptor &d, std::int64_t base_presentation) {
  using Kind = OutputSource::Kind;
  RunSchedule out;
  out.reserve(std::size_t(run.fresh_count * outputs_per_fresh_frame(d.flags)));
  std::int64_t next = base_presentation;
  for (int t = 0; t < run.fresh_count; ++t) {
    const int p = run.fresh_position() + t;
    if (!d.flags.interpolation) {
      out.push_back({{Kind::Network, p}, next++});
    } else if (!d.flags.double_frame) {
      out.push_back({{Kind::PassThrough, p}, next++});
      out.push_back({{Kind::Network, p}, next++});
    } else {
      out.push_back({{Kind::Network, 2 * p}, next++});
      out.push_back({{Kind::Network, 2 * p + 1}, next++});
    }
  }
  return out;
}

OutputSchedule schedule_outputs(const RunPlan &plan, const NetworkDescriptor &d, std::int64_t base_presentation) {
  OutputSchedule schedule;
  schedule.runs.reserve(plan.runs.size());
  for (const auto &run : plan.runs) {
    schedule.runs.push_back(schedule_run(run, d, base_presentation));
    base_presentation += std::int64_t(schedule.runs.back().size());
  }
  return schedule;
}

bool is_stride_aligned(const Run &run, int n, const NetworkFlags &flags) {
  const std::size_t expected = std::size_t(n) + (flags.extra_frame ? 1 : 0);
  if (run.fresh_count != n || run.inputs.size() != expected || run.fresh_start % n != 0) return false;
  for (std::size_t k = 0; k < run.inputs.size(); ++k) {
    if (run.inputs[k] != run.fresh_start + FrameRef(k)) return false;
  }
  return true;
}

std::vector<Batch> plan_batches(const RunPlan &plan, int b) {
  if (b < 1) throw InvalidConfig("batch must be >= 1");
  const bool sharing = plan.flags.interpolation && plan.flags.extra_frame;
  std::vector<Batch> batches;
  for (std::size_t first = 0; first < plan.runs.size(); first += std::size_t(b)) {
    Batch batch;
    const std::size_t last = std::min(plan.runs.size(), first + std::size_t(b));
    batch.lanes.assign(plan.runs.begin() + std::ptrdiff_t(first), plan.runs.begin() + std::ptrdiff_t(last));
    batch.real_lanes = int(batch.lanes.size());

    batch.shared = sharing && batch.real_lanes == b;
    for (std::size_t j = 0; batch.shared && j < batch.lanes.size(); ++j) {
      batch.shared = is_stride_aligned(batch.lanes[j], plan.n, plan.flags) &&
                     (j == 0 || batch.lanes[j].fresh_start == batch.lanes[j - 1].fresh_start + plan.n);
    }

    while (int(batch.lanes.size()) < b) {
      Run pad = batch.lanes[std::size_t(batch.real_lanes - 1)];
      pad.fresh_count = 0;
      batch.lanes.push_back(std::move(pad));
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

SceneBatcher::SceneBatcher(const NetworkDescriptor &d) : desc_(d) { validate_descriptor(d); }

std::int64_t SceneBatcher::window() const { return std::int64_t(desc_.batch) * desc_.n + 1; }

std::vector<Batch> SceneBatcher::grow(std::int64_t length) {
  std::vector<Batch> ready;
  const std::int64_t per_batch = std::int64_t(desc_.batch) * desc_.n;
  while (length >= std::int64_t(emitted_ + 1) * per_batch + 1) {
    RunPlan plan;
    plan.n = desc_.n;
    plan.flags = desc_.flags;
    for (int j = 0; j < desc_.batch; ++j) {
      plan.runs.push_back(regular_run(std::int64_t(emitted_) * desc_.batch + j, desc_));
    }
    auto batches = plan_batches(plan, desc_.batch);
    ready.push_back(std::move(batches.front()));
    ++emitted_;
  }
  return ready;
}

std::vector<Batch> SceneBatcher::finish(std::int64_t length) {
  auto all = plan_batches(plan_scene(length, desc_), desc_.batch);
  std::vector<Batch> rest;
  for (std::size_t i = emitted_; i < all.size(); ++i) rest.push_back(std::move(all[i]));
  emitted_ = 0;
  return rest;
}

}  // namespace vidpipe
