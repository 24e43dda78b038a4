#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smart_hands/config.hpp"
#include "smart_hands/stream_sync.hpp"
#include "smart_hands/types.hpp"

namespace smart_hands::perception {

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// Axis-aligned detection box in pixel coordinates.
struct BoundingBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double confidence = 1.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  BoundingBox clamped(int frame_w, int frame_h) const;

  bool operator==(const BoundingBox&) const = default;
};

struct Keypoint {
  double x = 0, y = 0;
  double confidence = 0;
};

/// Named 2-D body keypoints for the detected driver. Must carry left_wrist
/// and right_wrist entries, however low their confidence.
struct PoseEstimate {
  std::map<std::string, Keypoint> keypoints;

  const Keypoint& wrist(Hand hand) const;
};

inline constexpr const char* kLeftWristJoint = "left_wrist";
inline constexpr const char* kRightWristJoint = "right_wrist";

/// Driver-seat region as fractions of the frame, used to discard detections
/// of passengers and bystanders.
struct SeatROI {
  double x_min = 0.0, y_min = 0.0, x_max = 1.0, y_max = 1.0;

  bool contains(double norm_x, double norm_y) const {
    return norm_x >= x_min && norm_x <= x_max && norm_y >= y_min &&
           norm_y <= y_max;
  }
};

/// Validates one ROI; throws ConfigError unless 0 <= min < max <= 1 per axis.
SeatROI validate_roi(const SeatROI& roi, std::string_view field);

/// Reads seat_roi.<view> entries ("x_min, y_min, x_max, y_max", normalized)
/// from a parsed config map. Views without an entry get the full frame.
std::array<SeatROI, kViewCount> seat_rois_from_map(const ConfigMap& map);

/// Integer pixel rectangle, half-open on both axes: x in [x_min, x_max),
/// y in [y_min, y_max).
struct PixelBox {
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  bool empty() const { return width() <= 0 || height() <= 0; }

  bool operator==(const PixelBox&) const = default;
};

/// Wrist-centered crop for one hand in one view. When `valid`, `box` is the
/// 2r-sided square around the wrist intersected with the frame and `pixels`
/// holds exactly box.width()*box.height() bytes. Low wrist confidence or an
/// off-frame wrist yields valid == false with no pixel data.
struct HandCrop {
  ViewId view = ViewId::WheelCam;
  Hand hand = Hand::Left;
  PixelBox box;
  bool valid = false;
  std::vector<std::uint8_t> pixels;
};

/// One optional crop per view, indexed in ViewId order. Absent entries mean
/// the view contributed nothing this tick (missing frame or failed stage).
using HandCropSet = std::array<std::optional<HandCrop>, kViewCount>;

// ---------------------------------------------------------------------------
// Inference boundary
// ---------------------------------------------------------------------------

/**
 * The pluggable model boundary: person detection, driver pose, and the two
 * fused crop classifiers. Real networks live behind this interface; the
 * replay harness substitutes scripted or noisy mocks.
 *
 * Classifier contract: exactly one optional crop per view in ViewId order;
 * the object head returns a distribution over all four ObjectClass values,
 * the location head over admissible_classes(hand), both in enum order.
 * Implementations must either be safe for concurrent calls or declare
 * themselves single-threaded.
 */
class InferenceBackends {
 public:
  virtual ~InferenceBackends() = default;

  virtual std::vector<BoundingBox> detect(const Frame& frame) = 0;
  virtual PoseEstimate estimate_pose(const Frame& frame,
                                     const BoundingBox& person) = 0;
  virtual ObjectProbs classify_object(Hand hand, const HandCropSet& crops) = 0;
  virtual LocationProbs classify_location(Hand hand,
                                          const HandCropSet& crops) = 0;
};

// ---------------------------------------------------------------------------
// Classification outcome
// ---------------------------------------------------------------------------

/// Two-stage outcome for one hand. location_probs is present exactly when
/// the object head's argmax was None; `label` is the argmax of whichever
/// vector decided.
struct HandState {
  Hand hand = Hand::Left;
  ObjectProbs object_probs;
  std::optional<LocationProbs> location_probs;
  ActivityLabel label;
};

struct ViewDiagnostic {
  ViewId view;
  std::string code;  // e.g. "no_driver_detected"
};

/// Everything perception produced for one synchronized tick. A nullopt hand
/// means no view yielded a valid crop (the Unknown state).
struct TickStates {
  std::uint64_t tick_index = 0;
  std::int64_t timestamp_us = 0;
  std::optional<HandState> left;
  std::optional<HandState> right;
  std::vector<ViewDiagnostic> diagnostics;

  const std::optional<HandState>& hand(Hand h) const {
    return h == Hand::Left ? left : right;
  }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Picks the detection whose center lies inside the seat ROI; ties break to
/// the largest area, then to the lowest input index. Throws NoDriverDetected
/// when no center qualifies.
BoundingBox select_driver(std::span<const BoundingBox> detections,
                          const SeatROI& roi, int frame_w, int frame_h);

/// Crops the square [wx-r, wx+r) x [wy-r, wy+r) around the integer-rounded
/// wrist, intersected with the frame. Partial crops stay partial; padding is
/// a backend preprocessing concern. Wrist confidence below min_conf (or a
/// crop wholly outside the frame) gives valid == false, never an error.
HandCrop crop_hand(const PoseEstimate& pose, Hand hand, const Frame& frame,
                   int radius_px, double min_conf);

/// Runs the two-stage decision: object head first; on a None argmax, the
/// location head over admissible_classes(hand) decides instead. Argmax ties
/// break to the lowest enum index. Throws NoValidCrop when no view supplied
/// a valid crop.
HandState classify_hand(Hand hand, const HandCropSet& crops,
                        InferenceBackends& backends);

/// Full perception pass for one synchronized tick: per present view
/// detect -> select driver -> pose -> crop both hands, then classify each
/// hand across views. Per-view failures become diagnostics and absent crops;
/// a hand with no valid crop anywhere comes back as nullopt (Unknown) rather
/// than aborting the tick. Pure given immutable inputs and a backend handle.
TickStates process_tick(const sync::SyncedFrameSet& set,
                        const std::array<SeatROI, kViewCount>& rois,
                        const PipelineConfig& cfg, InferenceBackends& backends);

}  // namespace smart_hands::perception
