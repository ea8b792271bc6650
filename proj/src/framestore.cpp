#include "vidpipe/framestore.hpp"

#include <algorithm>
#include <string>

namespace vidpipe {

SlotRef shared_slot_offset(int k, int j, int r, const StoreLayout &layout) {
  const int n = layout.n;
  const int b = layout.b;
  if (k < 0 || k > n || j < 0 || j >= b || r < 0 || r >= layout.regions) {
    throw LayoutError("slot " + std::to_string(k) + " lane " + std::to_string(j) + " region " + std::to_string(r) +
                      " outside n=" + std::to_string(n) + " b=" + std::to_string(b) +
                      " R=" + std::to_string(layout.regions));
  }
  const std::int64_t base = layout.region_base(r);
  if (k == 0) return {base + j};
  if (k == n) return {base + 1 + j};
  return {base + 1 + b + std::int64_t(k - 1) * b + j};
}

std::vector<Placement> shared_placement(const Batch &batch, int r, const StoreLayout &layout) {
  if (!batch.shared) throw LayoutError("batch is not stride-aligned; use the plain layout");
  if (int(batch.lanes.size()) != layout.b) throw LayoutError("batch lane count does not match the store");
  const FrameRef f0 = batch.first_frame();
  const std::int64_t base = layout.region_base(r);
  std::vector<Placement> out(std::size_t(layout.n) * std::size_t(layout.b) + 1);
  for (int j = 0; j < layout.b; ++j) {
    for (int k = 0; k <= layout.n; ++k) {
      const SlotRef s = shared_slot_offset(k, j, r, layout);
      out[std::size_t(s.offset - base)] = {shared_slot_frame(k, j, f0, layout.n), s};
    }
  }
  return out;
}

CopyInstruction advance_region(int r, const StoreLayout &layout) {
  if (r < 0 || r >= layout.regions) throw LayoutError("region " + std::to_string(r) + " out of range");
  const int next = (r + 1) % layout.regions;
  return {{layout.region_base(r) + layout.b}, {layout.region_base(next)}};
}

std::vector<Placement> place_plain(const Run &run, int lane, int b, std::int64_t capacity) {
  if (lane < 0 || lane >= b) throw CapacityError("lane " + std::to_string(lane) + " outside batch " + std::to_string(b));
  const std::int64_t needed = std::int64_t(run.inputs.size()) * b;
  if (needed > capacity) {
    throw CapacityError("plain layout needs " + std::to_string(needed) + " slots, store has " +
                        std::to_string(capacity));
  }
  std::vector<Placement> out;
  out.reserve(run.inputs.size());
  for (std::size_t k = 0; k < run.inputs.size(); ++k) {
    out.push_back({run.inputs[k], plain_slot_offset(int(k), lane, b)});
  }
  return out;
}

std::int64_t memory_footprint(const StoreLayout &layout, StoreMode mode) {
  const std::int64_t n = layout.n;
  const std::int64_t b = layout.b;
  return mode == StoreMode::Shared ? n * b + 1 : b * (n + 1);
}

}  // namespace vidpipe
