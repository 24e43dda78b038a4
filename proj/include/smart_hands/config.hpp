#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "smart_hands/types.hpp"

namespace smart_hands {

/// Raw key/value pairs from a flat TOML-style config file. Dotted keys are
/// kept verbatim ("crop_radius_px.wheel_cam"); later assignments win.
using ConfigMap = std::map<std::string, std::string>;

/// Parses `key = value` lines. '#' starts a comment; blank lines are
/// skipped; values may be quoted. Throws ParseError with the line number.
ConfigMap parse_config_text(std::istream& in);
ConfigMap load_config_file(const std::string& path);

/// Applies `key=value` override strings (e.g. from CLI flags) on top of a
/// parsed map. Flag values win over file values.
void apply_overrides(ConfigMap& map, const std::vector<std::string>& overrides);

/// Tuning knobs for the whole pipeline. Defaults follow the reference
/// deployment: 30 fps capture, 100 px crop radius, 3-tick smoothing window,
/// 150-tick alert threshold (~5 s), 300-tick post-alert cooldown (~10 s).
struct PipelineConfig {
  std::array<int, kViewCount> crop_radius_px = {100, 100, 100, 100};
  std::int64_t sync_tolerance_us = 16'667;  // half the 30 fps frame period
  int smoothing_window = 3;
  int alert_threshold = 150;
  double nominal_fps = 30.0;
  int alert_cooldown = 300;
  std::string distraction_predicate = "wheel_or_object";

  // Secondary knobs. Buffer cap bounds synchronizer memory; the wrist
  // confidence gate invalidates crops from uncertain pose keypoints; the
  // unknown-hands flag decides whether unclassifiable ticks count as
  // distraction (off by default so occlusion cannot raise alerts).
  int sync_buffer_cap = 8;
  double wrist_min_confidence = 0.3;
  bool unknown_hands_distract = false;

  std::int64_t frame_period_us() const {
    return static_cast<std::int64_t>(1'000'000.0 / nominal_fps);
  }

  bool operator==(const PipelineConfig&) const = default;
};

/// Builds a PipelineConfig from parsed keys, starting from defaults.
/// Unknown keys are ignored (the same file also carries seat ROIs).
/// The result is validated before it is returned.
PipelineConfig config_from_map(const ConfigMap& map);

/// Returns cfg unchanged when every invariant holds; otherwise throws
/// ConfigError naming the offending field. Idempotent by construction.
PipelineConfig validate_config(const PipelineConfig& cfg);

}  // namespace smart_hands
