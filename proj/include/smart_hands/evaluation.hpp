#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smart_hands/perception.hpp"

namespace smart_hands::eval {

// ---------------------------------------------------------------------------
// Confusion matrices
// ---------------------------------------------------------------------------

/// Square count grid over an ordered label list; rows are the true class,
/// columns the predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels);

  /// CSV layout: a header row of labels, then one count row per true class.
  static ConfusionMatrix from_csv(std::istream& in);
  void write_csv(std::ostream& out) const;

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::uint64_t at(std::size_t true_idx, std::size_t pred_idx) const;
  std::optional<std::size_t> index_of(std::string_view label) const;

  void add(std::size_t true_idx, std::size_t pred_idx, std::uint64_t n = 1);

  std::uint64_t total() const;
  std::uint64_t trace() const;

  /// trace / total. Throws EmptyMatrix on a zero-count grid.
  double accuracy() const;

  struct ClassMetrics {
    std::optional<double> precision;  // absent when the column sums to zero
    std::optional<double> recall;     // absent when the row sums to zero
  };
  std::vector<ClassMetrics> per_class_metrics() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<std::uint64_t>> counts_;
};

// ---------------------------------------------------------------------------
// Detection metrics
// ---------------------------------------------------------------------------

/// Ground truth and scored predictions for one image.
struct DetectionSample {
  std::vector<perception::BoundingBox> ground_truth;
  std::vector<perception::BoundingBox> predictions;  // confidence = score
};

/// Intersection-over-union of two boxes; 0 when they do not overlap.
double iou(const perception::BoundingBox& a, const perception::BoundingBox& b);

/**
 * Single-class average precision at the given IoU threshold.
 *
 * Protocol, pinned so independent reimplementations agree exactly:
 *   1. Flatten predictions over samples in (sample, prediction) order and
 *      stable-sort by confidence descending; ties keep input order.
 *   2. Greedy matching in that order: a prediction matches the unmatched
 *      ground-truth box of its own sample with the highest IoU, provided
 *      IoU >= threshold; first such box on ties. Matched = TP, else FP.
 *   3. After the k-th prediction (1-based): recall_k = tp_k / total_gt,
 *      precision_k = tp_k / k.
 *   4. Monotone envelope right-to-left: env_k = max(precision_k, env_{k+1}).
 *   5. AP = sum over ascending k of (recall_k - recall_{k-1}) * env_k,
 *      with recall_0 = 0.
 *
 * Throws NoGroundTruth when the samples carry no ground-truth box at all.
 */
double average_precision(std::span<const DetectionSample> samples,
                         double iou_threshold);

/// average_precision at the 50%-overlap operating point.
double map50(std::span<const DetectionSample> samples);

// ---------------------------------------------------------------------------
// Throughput composition
// ---------------------------------------------------------------------------

struct StageProfile {
  struct Stage {
    std::string name;
    double rate_fps = 0;
  };
  std::vector<Stage> stages;
};

enum class ComposeMode { Sequential, Pipelined };

/// Sequential: stages share one worker, 1 / sum(1/rate). Pipelined: stages
/// overlap and the slowest one bounds throughput, min(rate).
double compose_throughput(const StageProfile& profile, ComposeMode mode);

// ---------------------------------------------------------------------------
// Fleet impact arithmetic
// ---------------------------------------------------------------------------

struct FleetImpact {
  double penetration = 0;               // equipped / fleet
  std::int64_t prevented_accidents = 0;  // round(accidents * fraction)
};

/// `fraction` is the effective accident-reduction fraction across the fleet
/// (deployment penetration times per-vehicle reduction), applied directly.
FleetImpact fleet_impact(std::int64_t equipped_vehicles,
                         std::int64_t fleet_vehicles, double fraction,
                         std::int64_t accidents);

// ---------------------------------------------------------------------------
// Dataset splitting
// ---------------------------------------------------------------------------

struct SequenceInfo {
  std::string id;
  std::uint64_t frames = 0;
};

/// Sequence index sets; splitting is by whole sequences so no sequence leaks
/// frames across sets.
struct DatasetSplit {
  std::vector<std::size_t> train, val, test;
};

/**
 * Deterministic contiguous split: walks the sequences in order and places
 * each cut at the prefix whose frame share is closest to the target ratio,
 * so realized fractions land within one sequence of the targets. Cuts are
 * clamped so every set keeps at least one sequence.
 *
 * Ratios must sum to 1; fewer than 3 sequences throws InsufficientData.
 */
DatasetSplit split_dataset(std::span<const SequenceInfo> sequences,
                           const std::array<double, 3>& ratios);

}  // namespace smart_hands::eval
