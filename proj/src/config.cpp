#include "smart_hands/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "smart_hands/errors.hpp"

namespace smart_hands {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  // Underscore separators are accepted, matching how defaults are written.
  std::string plain;
  plain.reserve(v.size());
  for (char c : v) {
    if (c != '_' && c != ',') plain.push_back(c);
  }
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(plain.data(), plain.data() + plain.size(), out);
  if (ec != std::errc() || p != plain.data() + plain.size()) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

}  // namespace

ConfigMap parse_config_text(std::istream& in) {
  ConfigMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::string text = trim(line);
    if (text.empty()) continue;
    auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ParseError(lineno, "expected 'key = value'");
    }
    std::string key = trim(text.substr(0, eq));
    std::string value = unquote(trim(text.substr(eq + 1)));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (value.empty()) throw ParseError(lineno, "empty value for '" + key + "'");
    map[key] = value;
  }
  return map;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config_text(in);
}

void apply_overrides(ConfigMap& map, const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override", "expected key=value, got '" + kv + "'");
    }
    std::string value = unquote(trim(kv.substr(eq + 1)));
    if (value.empty()) {
      throw ConfigError("override", "empty value in '" + kv + "'");
    }
    map[trim(kv.substr(0, eq))] = value;
  }
}

PipelineConfig config_from_map(const ConfigMap& map) {
  PipelineConfig cfg;
  for (const auto& [key, value] : map) {
    if (key == "crop_radius_px") {
      cfg.crop_radius_px.fill(static_cast<int>(to_int(key, value)));
    } else if (key.rfind("crop_radius_px.", 0) == 0) {
      auto view = parse_view(key.substr(std::string("crop_radius_px.").size()));
      if (!view) throw ConfigError(key, "unknown view");
      cfg.crop_radius_px[view_index(*view)] = static_cast<int>(to_int(key, value));
    } else if (key == "sync_tolerance_us") {
      cfg.sync_tolerance_us = to_int(key, value);
    } else if (key == "smoothing_window") {
      cfg.smoothing_window = static_cast<int>(to_int(key, value));
    } else if (key == "alert_threshold") {
      cfg.alert_threshold = static_cast<int>(to_int(key, value));
    } else if (key == "nominal_fps") {
      cfg.nominal_fps = to_double(key, value);
    } else if (key == "alert_cooldown") {
      cfg.alert_cooldown = static_cast<int>(to_int(key, value));
    } else if (key == "distraction_predicate") {
      cfg.distraction_predicate = value;
    } else if (key == "sync_buffer_cap") {
      cfg.sync_buffer_cap = static_cast<int>(to_int(key, value));
    } else if (key == "wrist_min_confidence") {
      cfg.wrist_min_confidence = to_double(key, value);
    } else if (key == "unknown_hands_distract") {
      cfg.unknown_hands_distract = to_bool(key, value);
    }
    // Other keys (seat_roi.*, ...) belong to other modules reading the
    // same file.
  }
  return validate_config(cfg);
}

PipelineConfig validate_config(const PipelineConfig& cfg) {
  for (ViewId v : kAllViews) {
    if (cfg.crop_radius_px[view_index(v)] <= 0) {
      throw ConfigError("crop_radius_px." + std::string(to_string(v)),
                        "must be positive");
    }
  }
  if (cfg.sync_tolerance_us <= 0) {
    throw ConfigError("sync_tolerance_us", "must be positive");
  }
  if (cfg.smoothing_window < 1) {
    throw ConfigError("smoothing_window", "must be >= 1");
  }
  if (cfg.alert_threshold < 1) {
    throw ConfigError("alert_threshold", "must be >= 1");
  }
  if (!(cfg.nominal_fps > 0.0)) {
    throw ConfigError("nominal_fps", "must be positive");
  }
  if (cfg.alert_cooldown < 1) {
    throw ConfigError("alert_cooldown", "must be positive");
  }
  if (cfg.sync_buffer_cap < 1) {
    throw ConfigError("sync_buffer_cap", "must be positive");
  }
  if (!(cfg.wrist_min_confidence >= 0.0 && cfg.wrist_min_confidence <= 1.0)) {
    throw ConfigError("wrist_min_confidence", "must be in [0,1]");
  }
  if (cfg.distraction_predicate.empty()) {
    throw ConfigError("distraction_predicate", "must name a predicate");
  }
  return cfg;
}

}  // namespace smart_hands
