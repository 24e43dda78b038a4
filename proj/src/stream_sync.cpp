#include "smart_hands/stream_sync.hpp"

#include <algorithm>
#include <limits>

#include "smart_hands/errors.hpp"

namespace smart_hands::sync {

std::vector<SyncedFrameSet> StreamSynchronizer::ingest(Frame frame) {
  const int vi = view_index(frame.view);
  const std::int64_t ts = frame.timestamp_us;

  // Error paths leave all state untouched; every counted frame lands in
  // exactly one of accepted / dropped_late / dropped_duplicate.
  if (last_ts_[vi]) {
    if (ts < *last_ts_[vi]) {
      throw OutOfOrderFrame(std::string(to_string(frame.view)) +
                            ": timestamp " + std::to_string(ts) +
                            " regresses below " + std::to_string(*last_ts_[vi]));
    }
    if (ts == *last_ts_[vi]) {
      ++stats_.ingested[vi];
      ++stats_.dropped_duplicate[vi];
      return {};
    }
  }

  // A frame older than the last emitted reference can no longer join any
  // future set without breaking reference monotonicity.
  if (last_reference_ && ts < *last_reference_) {
    last_ts_[vi] = ts;
    ++stats_.ingested[vi];
    ++stats_.dropped_late[vi];
    return {};
  }

  if (buffers_[vi].size() >= buffer_cap_) {
    throw BufferOverflow(std::string(to_string(frame.view)) +
                         ": buffer cap " + std::to_string(buffer_cap_) +
                         " exceeded");
  }
  last_ts_[vi] = ts;
  ++stats_.ingested[vi];
  ++stats_.accepted[vi];
  buffers_[vi].push_back(std::move(frame));

  max_observed_ts_ = any_observed_ ? std::max(max_observed_ts_, ts) : ts;
  any_observed_ = true;

  std::vector<SyncedFrameSet> out;
  emit_pending(out, /*force=*/false);
  return out;
}

std::vector<SyncedFrameSet> StreamSynchronizer::flush() {
  std::vector<SyncedFrameSet> out;
  emit_pending(out, /*force=*/true);
  return out;
}

void StreamSynchronizer::emit_pending(std::vector<SyncedFrameSet>& out,
                                      bool force) {
  while (auto set = try_emit(force)) {
    out.push_back(std::move(*set));
  }
}

std::optional<SyncedFrameSet> StreamSynchronizer::try_emit(bool force) {
  // Anchor at the earliest buffered frame.
  std::int64_t anchor = std::numeric_limits<std::int64_t>::max();
  bool any = false;
  for (const auto& buf : buffers_) {
    if (!buf.empty()) {
      anchor = std::min(anchor, buf.front().timestamp_us);
      any = true;
    }
  }
  if (!any) return std::nullopt;

  // Fronts are per-view minima, so a view joins iff its front is within
  // tolerance of the anchor; every member then lies in [anchor, anchor+tol].
  std::array<bool, kViewCount> member{};
  int member_count = 0;
  for (int vi = 0; vi < kViewCount; ++vi) {
    if (!buffers_[vi].empty() &&
        buffers_[vi].front().timestamp_us - anchor <= tolerance_us_) {
      member[vi] = true;
      ++member_count;
    }
  }

  const bool complete = member_count == kViewCount;
  const bool timed_out = max_observed_ts_ - anchor > timeout_us_;
  if (!complete && !timed_out && !force) return std::nullopt;

  SyncedFrameSet set;
  set.tick_index = next_tick_++;
  set.reference_timestamp_us = anchor;
  for (int vi = 0; vi < kViewCount; ++vi) {
    if (member[vi]) {
      set.frames[vi] = std::move(buffers_[vi].front());
      buffers_[vi].pop_front();
    } else {
      set.missing.push_back(kAllViews[vi]);
    }
  }
  last_reference_ = anchor;
  return set;
}

}  // namespace smart_hands::sync
