#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smart_hands/errors.hpp"

namespace smart_hands {

// ---------------------------------------------------------------------------
// Camera views
// ---------------------------------------------------------------------------

/// The four cabin views, in the fixed order used for fusion input layout.
/// The integer value of each enumerator is its slot index everywhere a
/// per-view array appears.
enum class ViewId : int {
  WheelCam = 0,       ///< behind the steering wheel
  DashDriverCam = 1,  ///< central dashboard, facing the driver
  DashCenterCam = 2,  ///< central dashboard, facing cabin center
  MirrorCam = 3,      ///< above the rearview mirror
};

inline constexpr int kViewCount = 4;

inline constexpr std::array<ViewId, kViewCount> kAllViews = {
    ViewId::WheelCam, ViewId::DashDriverCam, ViewId::DashCenterCam,
    ViewId::MirrorCam};

constexpr int view_index(ViewId v) { return static_cast<int>(v); }

std::string_view to_string(ViewId v);
std::optional<ViewId> parse_view(std::string_view name);

// ---------------------------------------------------------------------------
// Activity taxonomies
// ---------------------------------------------------------------------------

/// Held-object classes. None means the hand holds nothing; it is never a
/// final activity label (a None verdict hands off to the location stage).
enum class ObjectClass : int { None = 0, Beverage = 1, Phone = 2, Tablet = 3 };

/// Hand location zones. The left hand is only ever classified into
/// {Wheel, Lap, Air}; the right hand may use all five.
enum class LocationClass : int {
  Wheel = 0,
  Lap = 1,
  Air = 2,
  Radio = 3,
  Cupholder = 4,
};

enum class Hand : int { Left = 0, Right = 1 };

inline constexpr std::array<ObjectClass, 4> kAllObjectClasses = {
    ObjectClass::None, ObjectClass::Beverage, ObjectClass::Phone,
    ObjectClass::Tablet};

inline constexpr std::array<LocationClass, 5> kAllLocationClasses = {
    LocationClass::Wheel, LocationClass::Lap, LocationClass::Air,
    LocationClass::Radio, LocationClass::Cupholder};

std::string_view to_string(ObjectClass c);
std::string_view to_string(LocationClass c);
std::string_view to_string(Hand h);
std::optional<ObjectClass> parse_object_class(std::string_view name);
std::optional<LocationClass> parse_location_class(std::string_view name);

/// Location zones a hand may be classified into, in enumeration order.
/// Left -> {Wheel, Lap, Air}; Right -> all five.
std::vector<LocationClass> admissible_classes(Hand hand);

// ---------------------------------------------------------------------------
// Probability vectors
// ---------------------------------------------------------------------------

/// Probabilities must sum to 1 within this tolerance.
inline constexpr double kProbSumTolerance = 1e-6;

/// A discrete distribution over an ordered subset of a label enumeration.
/// `labels` enumerates the admissible classes in enum order; `probs` holds
/// one probability per label. Argmax ties break to the lowest enum index.
template <typename Label>
struct ProbVector {
  std::vector<Label> labels;
  std::vector<double> probs;

  std::size_t size() const { return labels.size(); }

  /// Index of the first maximal probability.
  std::size_t argmax_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
      if (probs[i] > probs[best]) best = i;
    }
    return best;
  }

  Label argmax() const { return labels[argmax_index()]; }

  double prob_of(Label l) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == l) return probs[i];
    }
    return 0.0;
  }

  /// One-hot distribution over `labels` with all mass on `hot`.
  static ProbVector one_hot(std::vector<Label> labels, Label hot) {
    ProbVector v;
    v.labels = std::move(labels);
    v.probs.assign(v.labels.size(), 0.0);
    for (std::size_t i = 0; i < v.labels.size(); ++i) {
      if (v.labels[i] == hot) v.probs[i] = 1.0;
    }
    return v;
  }

  bool operator==(const ProbVector&) const = default;
};

using ObjectProbs = ProbVector<ObjectClass>;
using LocationProbs = ProbVector<LocationClass>;

/// Throws BackendContract unless sizes match, entries lie in [0,1], labels
/// strictly ascend in enum order, and the mass sums to 1 +- tolerance.
template <typename Label>
void validate_prob_vector(const ProbVector<Label>& v,
                          std::string_view context) {
  if (v.labels.empty() || v.labels.size() != v.probs.size()) {
    throw BackendContract(std::string(context) + ": label/prob size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < v.probs.size(); ++i) {
    const double p = v.probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw BackendContract(std::string(context) + ": probability out of [0,1]");
    }
    if (i > 0 && !(static_cast<int>(v.labels[i]) > static_cast<int>(v.labels[i - 1]))) {
      throw BackendContract(std::string(context) + ": labels not in enum order");
    }
    sum += p;
  }
  if (sum < 1.0 - kProbSumTolerance || sum > 1.0 + kProbSumTolerance) {
    throw BackendContract(std::string(context) + ": probabilities sum to " +
                          std::to_string(sum));
  }
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// One timestamped single-view IR image. Timestamps are integer microseconds
/// since the stream epoch; integer math keeps tolerance comparisons exact.
struct Frame {
  ViewId view = ViewId::WheelCam;
  std::int64_t timestamp_us = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width * height bytes

  Frame() = default;
  Frame(ViewId v, std::int64_t ts_us, int w, int h,
        std::vector<std::uint8_t> px)
      : view(v), timestamp_us(ts_us), width(w), height(h),
        pixels(std::move(px)) {
    if (width <= 0 || height <= 0) {
      throw ConfigError("frame", "dimensions must be positive");
    }
    if (pixels.size() != static_cast<std::size_t>(width) * height) {
      throw ConfigError("frame", "pixel buffer length != width * height");
    }
  }

  /// Zero-filled frame, for synthetic streams with no image assets.
  static Frame blank(ViewId v, std::int64_t ts_us, int w, int h) {
    return Frame(v, ts_us, w, h,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h));
  }
};

// ---------------------------------------------------------------------------
// Final activity labels
// ---------------------------------------------------------------------------

/// Outcome of the two-stage decision: a held object (never None) or, when the
/// hand holds nothing, a location zone.
struct ActivityLabel {
  enum class Kind : int { Object = 0, Location = 1 };

  Kind kind = Kind::Location;
  ObjectClass object = ObjectClass::None;
  LocationClass location = LocationClass::Wheel;

  static ActivityLabel of(ObjectClass c) {
    return ActivityLabel{Kind::Object, c, LocationClass::Wheel};
  }
  static ActivityLabel of(LocationClass c) {
    return ActivityLabel{Kind::Location, ObjectClass::None, c};
  }

  bool is_object() const { return kind == Kind::Object; }
  bool is_location() const { return kind == Kind::Location; }

  bool operator==(const ActivityLabel&) const = default;
};

std::string_view to_string(const ActivityLabel& label);

/// Parses either taxonomy; object "none" is rejected (not an activity).
std::optional<ActivityLabel> parse_activity_label(std::string_view name);

}  // namespace smart_hands
