#pragma once

// Batched frame store.
//
// A batch of b interpolation runs, each consuming n frames plus one lookahead,
// touches only b*n + 1 distinct frames: the lookahead of lane j is slot 0 of
// lane j+1. The shared layout stores each of those frames once while keeping
// the b lanes of every input slot contiguous, which is what a batched tensor
// needs. Slots are laid out column first; for n=3, b=2 one region reads
//
//   offset: 0  1  2  3  4  5  6
//   frame:  0  3  6  1  4  2  5
//
//   slot 0 lanes -> offsets {0,1}      slot n lanes -> offsets {1,2}
//   slot k lanes -> offsets {1+b+(k-1)b, ...}  for 1 <= k < n
//
// Regions form a ring of R regions with base(r) = r*n*b, so region r+1 begins
// on region r's last offset. Moving on to the next batch copies a single item:
// the frame at base(r)+b (the next batch's first frame) to base(r+1).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vidpipe/errors.hpp"
#include "vidpipe/grouper.hpp"

namespace vidpipe {

struct StoreLayout {
  int n = 1;
  int b = 1;
  int regions = 2;

  std::int64_t region_base(int r) const { return std::int64_t(r) * n * b; }
  // R*n*b + 1
  std::int64_t shared_slots() const { return std::int64_t(regions) * n * b + 1; }
  std::int64_t plain_slots(int input_count) const { return std::int64_t(b) * input_count; }
};

struct SlotRef {
  std::int64_t offset = 0;
  friend bool operator==(const SlotRef &, const SlotRef &) = default;
};

struct CopyInstruction {
  SlotRef src;
  SlotRef dst;
};

// Offset of input slot k (0..n, n = lookahead) for lane j in region r.
SlotRef shared_slot_offset(int k, int j, int r, const StoreLayout &layout);

// Frame held by slot k of lane j when the region's first frame is f0.
inline FrameRef shared_slot_frame(int k, int j, FrameRef f0, int n) { return f0 + FrameRef(j) * n + k; }

struct Placement {
  FrameRef frame;
  SlotRef slot;
};

// One placement per distinct offset of region r (n*b + 1 of them), in offset
// order. Throws LayoutError unless the batch is shared.
std::vector<Placement> shared_placement(const Batch &batch, int r, const StoreLayout &layout);

CopyInstruction advance_region(int r, const StoreLayout &layout);

inline SlotRef plain_slot_offset(int k, int j, int b) { return {std::int64_t(k) * b + j}; }

// Plain layout for one lane: slot k at offset k*b + j. Repeated frame refs
// get one placement each. Throws CapacityError when the store is too small.
std::vector<Placement> place_plain(const Run &run, int lane, int b, std::int64_t capacity);

enum class StoreMode { Shared, Plain };

// Distinct items one batch keeps resident: n*b + 1 shared, b*(n+1) plain.
std::int64_t memory_footprint(const StoreLayout &layout, StoreMode mode);

template <class T>
class FrameStore {
 public:
  explicit FrameStore(std::int64_t slots) : items_(std::size_t(slots)), frames_(std::size_t(slots), kEmpty) {}

  std::int64_t size() const { return std::int64_t(items_.size()); }

  void put(SlotRef s, FrameRef frame, T item) {
    check(s);
    if (frames_[idx(s)] == kEmpty) ++occupied_;
    items_[idx(s)] = std::move(item);
    frames_[idx(s)] = frame;
    ++writes_;
  }

  void copy(const CopyInstruction &c) {
    check(c.src);
    check(c.dst);
    if (frames_[idx(c.src)] == kEmpty) throw LayoutError("copy from empty slot " + std::to_string(c.src.offset));
    if (frames_[idx(c.dst)] == kEmpty) ++occupied_;
    items_[idx(c.dst)] = items_[idx(c.src)];
    frames_[idx(c.dst)] = frames_[idx(c.src)];
    ++copies_;
  }

  // `count` consecutive slots starting at `first`: the lanes of one input slot.
  std::span<const T> lanes(SlotRef first, std::int64_t count) const {
    if (first.offset < 0 || count < 0 || first.offset + count > size()) {
      throw CapacityError("lane span out of store bounds");
    }
    return {items_.data() + first.offset, std::size_t(count)};
  }

  const T &at(SlotRef s) const {
    check(s);
    return items_[idx(s)];
  }

  std::optional<FrameRef> frame_at(SlotRef s) const {
    check(s);
    const FrameRef f = frames_[idx(s)];
    return f == kEmpty ? std::nullopt : std::optional<FrameRef>(f);
  }

  void clear() {
    std::fill(items_.begin(), items_.end(), T{});
    std::fill(frames_.begin(), frames_.end(), kEmpty);
    occupied_ = 0;
  }

  std::int64_t occupied() const { return occupied_; }
  std::int64_t writes() const { return writes_; }
  std::int64_t copies() const { return copies_; }

 private:
  static constexpr FrameRef kEmpty = std::numeric_limits<FrameRef>::min();

  static std::size_t idx(SlotRef s) { return std::size_t(s.offset); }
  void check(SlotRef s) const {
    if (s.offset < 0 || s.offset >= size()) {
      throw CapacityError("slot " + std::to_string(s.offset) + " outside store of " + std::to_string(size()));
    }
  }

  std::vector<T> items_;
  std::vector<FrameRef> frames_;
  std::int64_t occupied_ = 0;
  std::int64_t writes_ = 0;
  std::int64_t copies_ = 0;
};

}  // namespace vidpipe
