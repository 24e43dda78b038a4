#include <algorithm>
#include <cmath>
#include <limits>

#include "smart_hands/errors.hpp"
#include "smart_hands/replay.hpp"

namespace smart_hands::replay {

namespace {

// ---------------------------------------------------------------------------
// Wrist layout data. Anchor points are normalized cabin coordinates
// (x: 0 = driver's left edge, 1 = center console; y: 0 = up, 1 = lap level);
// each view applies its own affine to model its perspective. Points are kept
// at least a few percent apart per (hand, view) so the nearest-activity
// decode is unambiguous after integer crop rounding.
// ---------------------------------------------------------------------------

struct CabinAnchor {
  double x, y;
};

CabinAnchor cabin_anchor(const ActivityLabel& activity, Hand hand) {
  const bool left = hand == Hand::Left;
  if (activity.is_object()) {
    switch (activity.object) {
      case ObjectClass::Beverage: return left ? CabinAnchor{0.30, 0.42}
                                              : CabinAnchor{0.72, 0.42};
      case ObjectClass::Phone: return left ? CabinAnchor{0.26, 0.33}
                                           : CabinAnchor{0.76, 0.31};
      case ObjectClass::Tablet: return left ? CabinAnchor{0.32, 0.58}
                                            : CabinAnchor{0.74, 0.60};
      case ObjectClass::None: break;  // not an activity
    }
    throw std::invalid_argument("no layout anchor for object 'none'");
  }
  switch (activity.location) {
    case LocationClass::Wheel: return left ? CabinAnchor{0.40, 0.46}
                                           : CabinAnchor{0.60, 0.46};
    case LocationClass::Lap: return left ? CabinAnchor{0.42, 0.76}
                                         : CabinAnchor{0.58, 0.76};
    case LocationClass::Air: return left ? CabinAnchor{0.36, 0.28}
                                         : CabinAnchor{0.64, 0.28};
    case LocationClass::Radio: return {0.84, 0.56};      // right hand only
    case LocationClass::Cupholder: return {0.88, 0.82};  // right hand only
  }
  throw std::invalid_argument("unreachable location anchor");
}

CabinAnchor view_projection(ViewId view, CabinAnchor a) {
  switch (view) {
    case ViewId::WheelCam:
      return {1.15 * a.x - 0.10, 1.20 * a.y - 0.12};
    case ViewId::DashDriverCam:
      return {a.x, a.y};
    case ViewId::DashCenterCam:
      return {0.90 * a.x + 0.07, 0.95 * a.y + 0.03};
    case ViewId::MirrorCam:
      return {0.97 - 0.90 * a.x, 0.88 * a.y + 0.06};  // mirrored horizontally
  }
  return a;
}

/// Every activity a hand can be scripted into, in taxonomy order.
std::vector<ActivityLabel> activities_for(Hand hand) {
  std::vector<ActivityLabel> out;
  for (ObjectClass c : kAllObjectClasses) {
    if (c != ObjectClass::None) out.push_back(ActivityLabel::of(c));
  }
  for (LocationClass c : admissible_classes(hand)) {
    out.push_back(ActivityLabel::of(c));
  }
  return out;
}

}  // namespace

WristPoint wrist_layout(const ActivityLabel& activity, Hand hand, ViewId view,
                        int width, int height) {
  const CabinAnchor p = view_projection(view, cabin_anchor(activity, hand));
  return {p.x * width, p.y * height};
}

ActivityLabel nearest_activity(Hand hand, ViewId view, double px, double py,
                               int width, int height) {
  ActivityLabel best = ActivityLabel::of(LocationClass::Wheel);
  double best_dist = std::numeric_limits<double>::infinity();
  for (const ActivityLabel& candidate : activities_for(hand)) {
    const WristPoint p = wrist_layout(candidate, hand, view, width, height);
    const double dx = p.x - px, dy = p.y - py;
    const double dist = dx * dx + dy * dy;
    if (dist < best_dist) {
      best_dist = dist;
      best = candidate;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Scripted backend
// ---------------------------------------------------------------------------

ScriptedBackends::ScriptedBackends(const Manifest& manifest,
                                   const PipelineConfig& cfg)
    : manifest_(&manifest), radius_px_(cfg.crop_radius_px) {}

std::vector<perception::BoundingBox> ScriptedBackends::detect(
    const Frame& frame) {
  const double w = frame.width, h = frame.height;
  // Driver torso box plus a smaller decoy so driver selection does real work.
  perception::BoundingBox driver{0.25 * w, 0.20 * h, 0.85 * w, 0.95 * h, 0.95};
  perception::BoundingBox decoy{0.01 * w, 0.01 * h, 0.15 * w, 0.30 * h, 0.50};
  return {decoy, driver};
}

perception::PoseEstimate ScriptedBackends::estimate_pose(
    const Frame& frame, const perception::BoundingBox& /*person*/) {
  const std::size_t tick = manifest_->tick_of(frame.timestamp_us);
  const auto& truth = manifest_->ticks[tick].truth;
  if (!truth) {
    throw NoGroundTruth("tick " + std::to_string(tick) +
                        " carries no ground truth to script a pose from");
  }
  perception::PoseEstimate pose;
  const int vi = view_index(frame.view);
  for (Hand hand : {Hand::Left, Hand::Right}) {
    const auto& wrist = truth->hand(hand).wrist_px[vi];
    const char* joint = hand == Hand::Left ? perception::kLeftWristJoint
                                           : perception::kRightWristJoint;
    if (wrist) {
      pose.keypoints[joint] = {wrist->x, wrist->y, 1.0};
    } else {
      pose.keypoints[joint] = {0.0, 0.0, 0.0};  // unknown: confidence 0
    }
  }
  return pose;
}

ActivityLabel ScriptedBackends::decode_activity(
    Hand hand, const perception::HandCropSet& crops) const {
  for (const auto& crop : crops) {
    if (!crop || !crop->valid) continue;
    const int vi = view_index(crop->view);
    const int r = radius_px_[vi];
    const int frame_w = manifest_->header.width[vi];
    const int frame_h = manifest_->header.height[vi];
    const perception::PixelBox& box = crop->box;

    // Undo the boundary clamp: an unclamped axis spans exactly 2r, a
    // single-side clamp leaves the opposite edge intact.
    auto center = [r](int lo, int hi, int limit) {
      if (hi - lo == 2 * r) return static_cast<double>(lo + r);
      if (lo == 0 && hi < limit) return static_cast<double>(hi - r);
      if (hi == limit && lo > 0) return static_cast<double>(lo + r);
      return 0.5 * (lo + hi);
    };
    const double wx = center(box.x_min, box.x_max, frame_w);
    const double wy = center(box.y_min, box.y_max, frame_h);
    return nearest_activity(hand, crop->view, wx, wy, frame_w, frame_h);
  }
  throw NoValidCrop("scripted classifier got no valid crop");
}

ObjectProbs ScriptedBackends::classify_object(
    Hand hand, const perception::HandCropSet& crops) {
  const ActivityLabel activity = decode_activity(hand, crops);
  const std::vector<ObjectClass> labels(kAllObjectClasses.begin(),
                                        kAllObjectClasses.end());
  const ObjectClass hot =
      activity.is_object() ? activity.object : ObjectClass::None;
  return ObjectProbs::one_hot(labels, hot);
}

LocationProbs ScriptedBackends::classify_location(
    Hand hand, const perception::HandCropSet& crops) {
  const ActivityLabel activity = decode_activity(hand, crops);
  // Reached only after a None-object verdict, so the activity is a zone in
  // every scripted flow; an object activity falls back to the first zone.
  const LocationClass hot =
      activity.is_location() ? activity.location : LocationClass::Wheel;
  return LocationProbs::one_hot(admissible_classes(hand), hot);
}

// ---------------------------------------------------------------------------
// Noisy backend
// ---------------------------------------------------------------------------

NoisyBackends::NoisyBackends(const Manifest& manifest,
                             const PipelineConfig& cfg, const NoiseSpec& spec)
    : scripted_(manifest, cfg), spec_(spec), rng_(spec.seed) {}

std::vector<perception::BoundingBox> NoisyBackends::detect(const Frame& frame) {
  return scripted_.detect(frame);
}

perception::PoseEstimate NoisyBackends::estimate_pose(
    const Frame& frame, const perception::BoundingBox& person) {
  return scripted_.estimate_pose(frame, person);
}

namespace {

/// Symmetric label noise: with probability `rate`, move the one-hot mass to
/// a uniformly drawn *different* class.
template <typename Label>
ProbVector<Label> perturb(ProbVector<Label> probs, double rate,
                          SplitMix64& rng) {
  if (rate <= 0.0 || !rng.bernoulli(rate)) return probs;
  const std::size_t hot = probs.argmax_index();
  const std::size_t offset =
      1 + static_cast<std::size_t>(rng.next_below(probs.size() - 1));
  const std::size_t flipped = (hot + offset) % probs.size();
  std::fill(probs.probs.begin(), probs.probs.end(), 0.0);
  probs.probs[flipped] = 1.0;
  return probs;
}

}  // namespace

ObjectProbs NoisyBackends::classify_object(
    Hand hand, const perception::HandCropSet& crops) {
  return perturb(scripted_.classify_object(hand, crops),
                 spec_.object_rate[static_cast<int>(hand)], rng_);
}

LocationProbs NoisyBackends::classify_location(
    Hand hand, const perception::HandCropSet& crops) {
  return perturb(scripted_.classify_location(hand, crops),
                 spec_.location_rate[static_cast<int>(hand)], rng_);
}

std::unique_ptr<perception::InferenceBackends> make_backends(
    const std::string& kind, const Manifest& manifest,
    const PipelineConfig& cfg, const NoiseSpec& noise) {
  if (kind == "scripted") {
    return std::make_unique<ScriptedBackends>(manifest, cfg);
  }
  if (kind == "noisy") {
    return std::make_unique<NoisyBackends>(manifest, cfg, noise);
  }
  throw ConfigError("backend", "unknown backend '" + kind + "'");
}

}  // namespace smart_hands::replay
