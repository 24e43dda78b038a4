#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "smart_hands/config.hpp"
#include "smart_hands/types.hpp"

namespace smart_hands::sync {

/// A bundle of per-view frames aligned in time. Views absent from the bundle
/// are listed in `missing`; present frames all lie within the configured
/// tolerance of `reference_timestamp_us` (the earliest frame in the bundle).
struct SyncedFrameSet {
  std::uint64_t tick_index = 0;
  std::int64_t reference_timestamp_us = 0;
  std::array<std::optional<Frame>, kViewCount> frames;
  std::vector<ViewId> missing;

  int present_count() const {
    return kViewCount - static_cast<int>(missing.size());
  }
};

/// Per-view ingest accounting. ingested == accepted + dropped_late +
/// dropped_duplicate at every instant; accepted frames end up in exactly one
/// emitted set once the stream is flushed.
struct StreamStats {
  std::array<std::uint64_t, kViewCount> ingested{};
  std::array<std::uint64_t, kViewCount> accepted{};
  std::array<std::uint64_t, kViewCount> dropped_late{};
  std::array<std::uint64_t, kViewCount> dropped_duplicate{};
};

/**
 * Aligns four independently timestamped camera streams into SyncedFrameSets.
 *
 * Grouping is anchored at the earliest buffered frame. A set is emitted as
 * soon as every view has a frame within sync_tolerance of that anchor, or
 * once any ingested timestamp runs more than two nominal frame periods past
 * it, in which case the set carries whichever views made it and lists the
 * rest in `missing`.
 *
 * Ingest rules per view: timestamps must not regress (OutOfOrderFrame), a
 * repeated timestamp is dropped as a duplicate, and a frame older than the
 * last emitted reference is dropped as late so references stay monotone.
 *
 * Single writer: ingest/flush calls must be externally serialized. Emitted
 * sets are immutable values, safe to hand to any number of consumers.
 */
class StreamSynchronizer {
 public:
  explicit StreamSynchronizer(const PipelineConfig& cfg)
      : tolerance_us_(cfg.sync_tolerance_us),
        timeout_us_(2 * cfg.frame_period_us()),
        buffer_cap_(static_cast<std::size_t>(cfg.sync_buffer_cap)) {}

  /// Buffers one frame; returns every set the new frame completes or times
  /// out. Throws OutOfOrderFrame or BufferOverflow.
  std::vector<SyncedFrameSet> ingest(Frame frame);

  /// Drains the buffers at end of stream, grouping what remains by the same
  /// anchor-and-tolerance rule without waiting for timeouts.
  std::vector<SyncedFrameSet> flush();

  const StreamStats& stats() const { return stats_; }

 private:
  std::optional<SyncedFrameSet> try_emit(bool force);
  void emit_pending(std::vector<SyncedFrameSet>& out, bool force);

  std::int64_t tolerance_us_;
  std::int64_t timeout_us_;
  std::size_t buffer_cap_;

  std::array<std::deque<Frame>, kViewCount> buffers_;
  std::array<std::optional<std::int64_t>, kViewCount> last_ts_;
  std::optional<std::int64_t> last_reference_;
  std::int64_t max_observed_ts_ = 0;
  bool any_observed_ = false;
  std::uint64_t next_tick_ = 0;
  StreamStats stats_;
};

}  // namespace smart_hands::sync
