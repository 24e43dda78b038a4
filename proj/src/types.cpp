#include "smart_hands/types.hpp"

namespace smart_hands {

std::string_view to_string(ViewId v) {
  switch (v) {
    case ViewId::WheelCam: return "wheel_cam";
    case ViewId::DashDriverCam: return "dash_driver_cam";
    case ViewId::DashCenterCam: return "dash_center_cam";
    case ViewId::MirrorCam: return "mirror_cam";
  }
  return "?";
}

std::optional<ViewId> parse_view(std::string_view name) {
  for (ViewId v : kAllViews) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

std::string_view to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::None: return "none";
    case ObjectClass::Beverage: return "beverage";
    case ObjectClass::Phone: return "phone";
    case ObjectClass::Tablet: return "tablet";
  }
  return "?";
}

std::string_view to_string(LocationClass c) {
  switch (c) {
    case LocationClass::Wheel: return "wheel";
    case LocationClass::Lap: return "lap";
    case LocationClass::Air: return "air";
    case LocationClass::Radio: return "radio";
    case LocationClass::Cupholder: return "cupholder";
  }
  return "?";
}

std::string_view to_string(Hand h) {
  return h == Hand::Left ? "left" : "right";
}

std::optional<ObjectClass> parse_object_class(std::string_view name) {
  for (ObjectClass c : kAllObjectClasses) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

std::optional<LocationClass> parse_location_class(std::string_view name) {
  for (LocationClass c : kAllLocationClasses) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

std::vector<LocationClass> admissible_classes(Hand hand) {
  if (hand == Hand::Left) {
    return {LocationClass::Wheel, LocationClass::Lap, LocationClass::Air};
  }
  return {kAllLocationClasses.begin(), kAllLocationClasses.end()};
}

std::string_view to_string(const ActivityLabel& label) {
  return label.is_object() ? to_string(label.object)
                           : to_string(label.location);
}

std::optional<ActivityLabel> parse_activity_label(std::string_view name) {
  if (auto obj = parse_object_class(name)) {
    if (*obj == ObjectClass::None) return std::nullopt;
    return ActivityLabel::of(*obj);
  }
  if (auto loc = parse_location_class(name)) {
    return ActivityLabel::of(*loc);
  }
  return std::nullopt;
}

}  // namespace smart_hands
