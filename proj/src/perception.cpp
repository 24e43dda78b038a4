#include "smart_hands/perception.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smart_hands/errors.hpp"

namespace smart_hands::perception {

BoundingBox BoundingBox::clamped(int frame_w, int frame_h) const {
  BoundingBox b = *this;
  b.x_min = std::clamp(b.x_min, 0.0, static_cast<double>(frame_w));
  b.x_max = std::clamp(b.x_max, 0.0, static_cast<double>(frame_w));
  b.y_min = std::clamp(b.y_min, 0.0, static_cast<double>(frame_h));
  b.y_max = std::clamp(b.y_max, 0.0, static_cast<double>(frame_h));
  return b;
}

const Keypoint& PoseEstimate::wrist(Hand hand) const {
  const char* joint = hand == Hand::Left ? kLeftWristJoint : kRightWristJoint;
  auto it = keypoints.find(joint);
  if (it == keypoints.end()) {
    throw BackendContract(std::string("pose estimate lacks ") + joint);
  }
  return it->second;
}

SeatROI validate_roi(const SeatROI& roi, std::string_view field) {
  auto bad = [&](const char* why) {
    throw ConfigError(std::string(field), why);
  };
  if (!(roi.x_min >= 0.0 && roi.x_min < roi.x_max && roi.x_max <= 1.0)) {
    bad("x range must satisfy 0 <= min < max <= 1");
  }
  if (!(roi.y_min >= 0.0 && roi.y_min < roi.y_max && roi.y_max <= 1.0)) {
    bad("y range must satisfy 0 <= min < max <= 1");
  }
  return roi;
}

std::array<SeatROI, kViewCount> seat_rois_from_map(const ConfigMap& map) {
  std::array<SeatROI, kViewCount> rois;  // defaults: full frame
  for (ViewId v : kAllViews) {
    const std::string key = "seat_roi." + std::string(to_string(v));
    auto it = map.find(key);
    if (it == map.end()) continue;

    std::istringstream in(it->second);
    SeatROI roi;
    char sep = ',';
    if (!(in >> roi.x_min >> sep >> roi.y_min >> sep >> roi.x_max >> sep >>
          roi.y_max)) {
      throw ConfigError(key, "expected four comma-separated fractions");
    }
    rois[view_index(v)] = validate_roi(roi, key);
  }
  return rois;
}

BoundingBox select_driver(std::span<const BoundingBox> detections,
                          const SeatROI& roi, int frame_w, int frame_h) {
  const BoundingBox* best = nullptr;
  for (const BoundingBox& det : detections) {
    const double cx = det.center_x() / frame_w;
    const double cy = det.center_y() / frame_h;
    if (!roi.contains(cx, cy)) continue;
    // Strict > keeps the lowest-index box on equal areas.
    if (best == nullptr || det.area() > best->area()) best = &det;
  }
  if (best == nullptr) {
    throw NoDriverDetected("no detection center inside the seat ROI");
  }
  return best->clamped(frame_w, frame_h);
}

HandCrop crop_hand(const PoseEstimate& pose, Hand hand, const Frame& frame,
                   int radius_px, double min_conf) {
  HandCrop crop;
  crop.view = frame.view;
  crop.hand = hand;

  const Keypoint& wrist = pose.wrist(hand);
  if (wrist.confidence < min_conf) return crop;  // valid == false

  const int wx = static_cast<int>(std::lround(wrist.x));
  const int wy = static_cast<int>(std::lround(wrist.y));
  PixelBox box{std::clamp(wx - radius_px, 0, frame.width),
               std::clamp(wy - radius_px, 0, frame.height),
               std::clamp(wx + radius_px, 0, frame.width),
               std::clamp(wy + radius_px, 0, frame.height)};
  if (box.empty()) return crop;  // wrist (plus radius) entirely off frame

  crop.box = box;
  crop.valid = true;
  crop.pixels.resize(static_cast<std::size_t>(box.width()) * box.height());
  for (int y = box.y_min; y < box.y_max; ++y) {
    const std::uint8_t* src =
        frame.pixels.data() + static_cast<std::size_t>(y) * frame.width + box.x_min;
    std::uint8_t* dst =
        crop.pixels.data() +
        static_cast<std::size_t>(y - box.y_min) * box.width();
    std::copy(src, src + box.width(), dst);
  }
  return crop;
}

namespace {

bool has_valid_crop(const HandCropSet& crops) {
  return std::any_of(crops.begin(), crops.end(), [](const auto& c) {
    return c.has_value() && c->valid;
  });
}

}  // namespace

HandState classify_hand(Hand hand, const HandCropSet& crops,
                        InferenceBackends& backends) {
  if (!has_valid_crop(crops)) {
    throw NoValidCrop(std::string(to_string(hand)) +
                      ": no view produced a valid crop");
  }

  HandState state;
  state.hand = hand;
  state.object_probs = backends.classify_object(hand, crops);
  validate_prob_vector(state.object_probs, "object classifier");
  if (state.object_probs.labels !=
      std::vector<ObjectClass>(kAllObjectClasses.begin(),
                               kAllObjectClasses.end())) {
    throw BackendContract("object classifier must cover all object classes");
  }

  const ObjectClass obj = state.object_probs.argmax();
  if (obj != ObjectClass::None) {
    state.label = ActivityLabel::of(obj);
    return state;
  }

  // Empty hand: the location head decides.
  LocationProbs loc = backends.classify_location(hand, crops);
  validate_prob_vector(loc, "location classifier");
  if (loc.labels != admissible_classes(hand)) {
    throw BackendContract("location classifier must cover the admissible set");
  }
  state.label = ActivityLabel::of(loc.argmax());
  state.location_probs = std::move(loc);
  return state;
}

TickStates process_tick(const sync::SyncedFrameSet& set,
                        const std::array<SeatROI, kViewCount>& rois,
                        const PipelineConfig& cfg,
                        InferenceBackends& backends) {
  if (set.present_count() < 1) {
    throw std::invalid_argument("process_tick: set has no frames");
  }

  TickStates out;
  out.tick_index = set.tick_index;
  out.timestamp_us = set.reference_timestamp_us;

  HandCropSet left_crops;
  HandCropSet right_crops;

  for (ViewId v : kAllViews) {
    const int vi = view_index(v);
    if (!set.frames[vi]) continue;
    const Frame& frame = *set.frames[vi];
    try {
      std::vector<BoundingBox> detections = backends.detect(frame);
      BoundingBox driver =
          select_driver(detections, rois[vi], frame.width, frame.height);
      PoseEstimate pose = backends.estimate_pose(frame, driver);
      const int radius = cfg.crop_radius_px[vi];
      left_crops[vi] =
          crop_hand(pose, Hand::Left, frame, radius, cfg.wrist_min_confidence);
      right_crops[vi] =
          crop_hand(pose, Hand::Right, frame, radius, cfg.wrist_min_confidence);
    } catch (const Error& e) {
      out.diagnostics.push_back({v, e.code()});
    }
  }

  auto classify = [&](Hand hand, const HandCropSet& crops)
      -> std::optional<HandState> {
    if (!has_valid_crop(crops)) return std::nullopt;  // Unknown state
    return classify_hand(hand, crops, backends);
  };
  out.left = classify(Hand::Left, left_crops);
  out.right = classify(Hand::Right, right_crops);
  return out;
}

}  // namespace smart_hands::perception
