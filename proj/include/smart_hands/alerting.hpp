#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "smart_hands/config.hpp"
#include "smart_hands/perception.hpp"
#include "smart_hands/types.hpp"

namespace smart_hands::alerting {

// ---------------------------------------------------------------------------
// Moving-window smoothing
// ---------------------------------------------------------------------------

/// Smoothed view of one hand. Vectors are absent when the window held no
/// data for that stage; `label` is absent (Unknown) when the smoothed
/// object argmax is None but no location data exists to decide.
struct SmoothedHand {
  std::optional<ObjectProbs> object_probs;
  std::optional<LocationProbs> location_probs;
  std::optional<ActivityLabel> label;
};

struct SmoothedState {
  std::uint64_t tick_index = 0;
  std::int64_t timestamp_us = 0;
  SmoothedHand left;
  SmoothedHand right;

  const SmoothedHand& hand(Hand h) const {
    return h == Hand::Left ? left : right;
  }
};

/**
 * Low-pass filter over per-tick classifications for the latest tick in
 * `history`: the element-wise arithmetic mean of the probability vectors in
 * the up-to-`window` most recent entries, per hand per stage, with the label
 * recomputed by the two-stage rule on the smoothed vectors.
 *
 * Entries whose hand is Unknown contribute nothing; location vectors are
 * averaged over the ticks that ran the location head. During warmup the mean
 * covers however many ticks exist.
 *
 * Arithmetic contract (tests replicate it bit for bit): sums accumulate
 * oldest to newest and divide by the contributing count; the result is
 * renormalized only if its mass drifts outside the 1e-6 tolerance, which
 * cannot happen for well-formed inputs.
 */
SmoothedState smooth(std::span<const perception::TickStates> history,
                     int window);

/// Stateful wrapper feeding a sliding window into smooth(), one tick at a
/// time and strictly in tick order.
class TemporalSmoother {
 public:
  explicit TemporalSmoother(int window);

  SmoothedState push(perception::TickStates tick);
  void reset() { window_.clear(); }

 private:
  int size_;
  std::deque<perception::TickStates> window_;
};

// ---------------------------------------------------------------------------
// Distraction predicates
// ---------------------------------------------------------------------------

using DistractionPredicate = bool (*)(const ActivityLabel& left,
                                      const ActivityLabel& right);

/// Distracted iff either hand holds an object, or neither hand is on the
/// wheel. Registered as "wheel_or_object" (the default).
bool default_predicate(const ActivityLabel& left, const ActivityLabel& right);

/// Distracted iff either hand holds an object; hands-off-wheel alone does
/// not trigger. Registered as "object_only".
bool object_only_predicate(const ActivityLabel& left,
                           const ActivityLabel& right);

/// Looks up a predicate by its registered id; throws ConfigError for ids
/// that name nothing.
DistractionPredicate find_predicate(std::string_view id);

// ---------------------------------------------------------------------------
// Alert state machine
// ---------------------------------------------------------------------------

/// Emitted exactly when the distraction counter reaches the threshold.
struct AlertEvent {
  std::uint64_t onset_tick = 0;
  std::int64_t onset_timestamp_us = 0;
  std::optional<ActivityLabel> left_label;
  std::optional<ActivityLabel> right_label;
  int duration_so_far = 0;  // == threshold at emission
};

/// One event as a single-line JSON object: onset_tick, onset_timestamp_us,
/// left_label, right_label. Unknown labels serialize as "unknown".
std::string to_jsonl(const AlertEvent& event);

/**
 * Counts consecutive distracted ticks against the alert threshold.
 *
 *   Monitoring --distracted--> Tracking --count==threshold--> Alerted
 *
 * Any clean tick hard-resets the counter to zero and returns to Monitoring.
 * Alerted suppresses further events until the cooldown elapses or the
 * predicate turns false, whichever happens first; either way the machine
 * re-arms in Monitoring with a zero counter.
 *
 * A tick with an Unknown hand counts as non-distracting unless the config
 * sets unknown_hands_distract.
 *
 * Sequential reducer: feed ticks in order from one thread; copies are cheap
 * and independent.
 */
class AlertMachine {
 public:
  enum class State { Monitoring, Tracking, Alerted };

  explicit AlertMachine(const PipelineConfig& cfg);

  std::optional<AlertEvent> step(const SmoothedState& state);

  /// Predicate evaluation including the Unknown-hand policy.
  bool is_distracted(const SmoothedState& state) const;

  State state() const { return state_; }
  int consecutive_distracted() const { return consecutive_distracted_; }
  int cooldown_remaining() const { return cooldown_remaining_; }
  int threshold() const { return threshold_; }
  int cooldown() const { return cooldown_; }

 private:
  int threshold_;
  int cooldown_;
  bool unknown_distracts_;
  DistractionPredicate predicate_;

  State state_ = State::Monitoring;
  int consecutive_distracted_ = 0;
  int cooldown_remaining_ = 0;
};

}  // namespace smart_hands::alerting
