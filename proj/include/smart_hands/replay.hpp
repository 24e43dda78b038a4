#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smart_hands/alerting.hpp"
#include "smart_hands/config.hpp"
#include "smart_hands/evaluation.hpp"
#include "smart_hands/perception.hpp"
#include "smart_hands/rng.hpp"
#include "smart_hands/stream_sync.hpp"
#include "smart_hands/types.hpp"

namespace smart_hands::replay {

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

struct WristPoint {
  double x = 0, y = 0;
};

/// Ground truth for one hand on one tick. The activity is the object when
/// one is held, otherwise the location; `location` doubles as the fallback
/// zone on object ticks and never enters location scoring there.
struct HandTruth {
  ObjectClass object = ObjectClass::None;
  LocationClass location = LocationClass::Wheel;
  std::array<std::optional<WristPoint>, kViewCount> wrist_px;

  ActivityLabel activity() const {
    return object != ObjectClass::None ? ActivityLabel::of(object)
                                       : ActivityLabel::of(location);
  }
};

struct TickTruth {
  HandTruth left, right;

  const HandTruth& hand(Hand h) const {
    return h == Hand::Left ? left : right;
  }
};

/// One manifest line: per-view capture timestamps (absent = dropped frame),
/// optional ground truth, optional image file references.
struct TickRecord {
  std::uint64_t tick = 0;
  std::array<std::optional<std::int64_t>, kViewCount> timestamps_us;
  std::optional<TickTruth> truth;
  std::array<std::optional<std::string>, kViewCount> image_refs;
};

struct ManifestHeader {
  int schema_version = kManifestSchemaVersion;
  double fps = 30.0;
  std::array<int, kViewCount> width = {640, 640, 640, 640};
  std::array<int, kViewCount> height = {480, 480, 480, 480};
};

/// A recorded or synthetic multi-view sequence: JSONL with a header line
/// followed by one tick record per line.
struct Manifest {
  ManifestHeader header;
  std::vector<TickRecord> ticks;

  /// Record index for a frame timestamp, clamped to the tick range.
  std::size_t tick_of(std::int64_t timestamp_us) const;

  /// Throws ManifestError (with the record index) on per-view timestamp
  /// regressions, out-of-range wrists, or an inadmissible left-hand zone.
  void validate() const;

  void save_jsonl(std::ostream& out) const;
  static Manifest load_jsonl(std::istream& in);
};

// ---------------------------------------------------------------------------
// Scenario scripts
// ---------------------------------------------------------------------------

/// One scripted stretch of constant activity. Drop probabilities and
/// timestamp jitter model capture imperfections per view.
struct ScenarioSegment {
  int duration_frames = 0;
  ActivityLabel left = ActivityLabel::of(LocationClass::Wheel);
  ActivityLabel right = ActivityLabel::of(LocationClass::Wheel);
  std::array<double, kViewCount> drop_prob{};
  std::int64_t jitter_us = 0;
};

/**
 * Text format, one statement per line:
 *
 *   fps = 30          # header keys: fps, width, height, seed
 *   seed = 7
 *   segment duration=300 left=wheel right=phone drop=0.1 jitter_us=500
 *   segment duration=150 left=wheel right=wheel drop.mirror_cam=0.2
 *
 * Activities are object classes (beverage/phone/tablet) or location zones;
 * left-hand zones must be admissible. Parse failures throw ParseError with
 * the line number.
 */
struct ScenarioScript {
  double fps = 30.0;
  int width = 640;
  int height = 480;
  std::uint64_t seed = 1;
  std::vector<ScenarioSegment> segments;

  static ScenarioScript parse(std::istream& in);
  static ScenarioScript load_file(const std::string& path);

  std::uint64_t total_frames() const;
};

/**
 * Deterministic manifest synthesis. Tick timestamps are
 * round(tick * 1e6 / fps) plus per-view uniform jitter in [-j, +j], nudged
 * forward if needed to keep each view strictly increasing; drops are
 * per-view Bernoulli draws. Wrist coordinates come from the fixed per-label
 * layout table, so crop geometry gets exercised for real. All randomness is
 * a single SplitMix64 stream drawn in (tick, view: drop then jitter) order.
 */
Manifest generate(const ScenarioScript& script);
Manifest generate(const ScenarioScript& script, std::uint64_t seed_override);

// ---------------------------------------------------------------------------
// Wrist layout table
// ---------------------------------------------------------------------------

/// Scripted wrist placement for an activity, in pixels of the given view.
/// Every (hand, view) has well-separated points across activities.
WristPoint wrist_layout(const ActivityLabel& activity, Hand hand, ViewId view,
                        int width, int height);

/// Inverse lookup: the activity whose layout point is nearest to the given
/// pixel position. Ties break in taxonomy order (objects, then zones).
ActivityLabel nearest_activity(Hand hand, ViewId view, double px, double py,
                               int width, int height);

// ---------------------------------------------------------------------------
// Mock inference backends
// ---------------------------------------------------------------------------

/**
 * Oracle backend: detection returns a fixed driver box plus a small decoy,
 * pose reads the manifest wrists for the frame's tick, and the classifier
 * heads decode the activity geometrically — they reconstruct the wrist from
 * the crop box (undoing boundary clamps) and apply nearest_activity. With
 * zero noise the pipeline therefore reproduces manifest ground truth
 * end-to-end through the actual crop geometry.
 *
 * Stateless per call; safe for concurrent use.
 */
class ScriptedBackends : public perception::InferenceBackends {
 public:
  ScriptedBackends(const Manifest& manifest, const PipelineConfig& cfg);

  std::vector<perception::BoundingBox> detect(const Frame& frame) override;
  perception::PoseEstimate estimate_pose(
      const Frame& frame, const perception::BoundingBox& person) override;
  ObjectProbs classify_object(Hand hand,
                              const perception::HandCropSet& crops) override;
  LocationProbs classify_location(
      Hand hand, const perception::HandCropSet& crops) override;

  /// Crop-geometry decode used by both classifier heads.
  ActivityLabel decode_activity(Hand hand,
                                const perception::HandCropSet& crops) const;

 private:
  const Manifest* manifest_;
  std::array<int, kViewCount> radius_px_;
};

/// Per-head symmetric label-noise rates, indexed by hand.
struct NoiseSpec {
  std::array<double, 2> object_rate{0.0, 0.0};
  std::array<double, 2> location_rate{0.0, 0.0};
  std::uint64_t seed = 1;

  static NoiseSpec uniform(double rate, std::uint64_t seed) {
    return NoiseSpec{{rate, rate}, {rate, rate}, seed};
  }
};

/// Scripted backend whose classifier heads flip the emitted label to a
/// uniformly drawn different class with the configured per-head probability.
/// The RNG stream is part of the backend state: single-threaded use only.
class NoisyBackends : public perception::InferenceBackends {
 public:
  NoisyBackends(const Manifest& manifest, const PipelineConfig& cfg,
                const NoiseSpec& spec);

  std::vector<perception::BoundingBox> detect(const Frame& frame) override;
  perception::PoseEstimate estimate_pose(
      const Frame& frame, const perception::BoundingBox& person) override;
  ObjectProbs classify_object(Hand hand,
                              const perception::HandCropSet& crops) override;
  LocationProbs classify_location(
      Hand hand, const perception::HandCropSet& crops) override;

 private:
  ScriptedBackends scripted_;
  NoiseSpec spec_;
  SplitMix64 rng_;
};

/// Factory for the CLI's --backend flag ("scripted" or "noisy").
std::unique_ptr<perception::InferenceBackends> make_backends(
    const std::string& kind, const Manifest& manifest,
    const PipelineConfig& cfg, const NoiseSpec& noise);

// ---------------------------------------------------------------------------
// End-to-end runs
// ---------------------------------------------------------------------------

/// Per-hand scoring of raw (pre-smoothing) per-tick predictions against
/// manifest truth. The object matrix sees every classified truth tick; the
/// location matrix sees the ticks where truth and prediction both reached
/// the location stage. object total + unknown + unseen == truth ticks.
struct HandScore {
  eval::ConfusionMatrix object_matrix;
  eval::ConfusionMatrix location_matrix;
  std::uint64_t unknown_ticks = 0;  // emitted but unclassifiable (no crop)
  std::uint64_t unseen_ticks = 0;   // truth tick never emitted by sync

  explicit HandScore(Hand hand);

  std::optional<double> object_accuracy() const;
  std::optional<double> location_accuracy() const;
};

struct RunReport {
  int schema_version = kReportSchemaVersion;
  std::uint64_t manifest_ticks = 0;
  std::uint64_t truth_ticks = 0;
  std::uint64_t sets_emitted = 0;
  HandScore left{Hand::Left};
  HandScore right{Hand::Right};
  std::vector<alerting::AlertEvent> events;
  sync::StreamStats stream;
  double ticks_per_second = 0;  // wall clock; excluded by to_json(false)

  const HandScore& hand(Hand h) const {
    return h == Hand::Left ? left : right;
  }

  /// `include_timing=false` yields the deterministic portion: two runs with
  /// the same manifest, config, and seed dump byte-identical JSON.
  nlohmann::json to_json(bool include_timing = true) const;
};

struct RunOptions {
  std::ostream* events_out = nullptr;  // JSONL sink, written as alerts fire
};

/// Streams the manifest through synchronization, perception, smoothing, and
/// alerting, in tick order, and aggregates the report. Throws ManifestError
/// on invalid input.
RunReport run(const Manifest& manifest, const PipelineConfig& cfg,
              const std::array<perception::SeatROI, kViewCount>& rois,
              perception::InferenceBackends& backends,
              const RunOptions& options = {});

}  // namespace smart_hands::replay
