#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "smart_hands/errors.hpp"
#include "smart_hands/replay.hpp"

namespace smart_hands::replay {

namespace {

using nlohmann::json;

json wrist_to_json(const std::array<std::optional<WristPoint>, kViewCount>& w) {
  json out = json::object();
  for (ViewId v : kAllViews) {
    if (const auto& p = w[view_index(v)]) {
      out[std::string(to_string(v))] = json::array({p->x, p->y});
    }
  }
  return out;
}

json truth_to_json(const HandTruth& t) {
  return json{{"object", std::string(to_string(t.object))},
              {"location", std::string(to_string(t.location))},
              {"wrist_px", wrist_to_json(t.wrist_px)}};
}

HandTruth truth_from_json(const json& j, std::size_t record) {
  HandTruth t;
  auto obj = parse_object_class(j.at("object").get<std::string>());
  auto loc = parse_location_class(j.at("location").get<std::string>());
  if (!obj || !loc) throw ManifestError(record, "unknown truth label");
  t.object = *obj;
  t.location = *loc;
  if (j.contains("wrist_px")) {
    for (const auto& [key, val] : j.at("wrist_px").items()) {
      auto view = parse_view(key);
      if (!view) throw ManifestError(record, "unknown view '" + key + "'");
      t.wrist_px[view_index(*view)] =
          WristPoint{val.at(0).get<double>(), val.at(1).get<double>()};
    }
  }
  return t;
}

}  // namespace

std::size_t Manifest::tick_of(std::int64_t timestamp_us) const {
  if (ticks.empty()) return 0;
  const double tick = static_cast<double>(timestamp_us) * header.fps / 1e6;
  const auto rounded = static_cast<std::int64_t>(std::llround(tick));
  return static_cast<std::size_t>(
      std::clamp<std::int64_t>(rounded, 0,
                               static_cast<std::int64_t>(ticks.size()) - 1));
}

void Manifest::validate() const {
  if (header.fps <= 0) throw ManifestError(0, "fps must be positive");
  for (ViewId v : kAllViews) {
    const int vi = view_index(v);
    if (header.width[vi] <= 0 || header.height[vi] <= 0) {
      throw ManifestError(0, "resolution must be positive");
    }
  }

  std::array<std::optional<std::int64_t>, kViewCount> last_ts;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const TickRecord& rec = ticks[i];
    for (ViewId v : kAllViews) {
      const int vi = view_index(v);
      if (const auto& ts = rec.timestamps_us[vi]) {
        if (last_ts[vi] && *ts < *last_ts[vi]) {
          throw ManifestError(i, std::string(to_string(v)) +
                                     ": timestamps regress");
        }
        last_ts[vi] = *ts;
      }
    }
    if (!rec.truth) continue;
    for (Hand hand : {Hand::Left, Hand::Right}) {
      const HandTruth& t = rec.truth->hand(hand);
      const auto admissible = admissible_classes(hand);
      if (std::find(admissible.begin(), admissible.end(), t.location) ==
          admissible.end()) {
        throw ManifestError(i, std::string(to_string(hand)) +
                                   " hand: inadmissible location zone");
      }
      for (ViewId v : kAllViews) {
        const int vi = view_index(v);
        if (const auto& w = t.wrist_px[vi]) {
          if (w->x < 0 || w->x > header.width[vi] || w->y < 0 ||
              w->y > header.height[vi]) {
            throw ManifestError(i, std::string(to_string(v)) +
                                       ": wrist outside the frame");
          }
        }
      }
    }
  }
}

void Manifest::save_jsonl(std::ostream& out) const {
  json views = json::array();
  for (ViewId v : kAllViews) {
    const int vi = view_index(v);
    views.push_back(json{{"view", std::string(to_string(v))},
                         {"width", header.width[vi]},
                         {"height", header.height[vi]}});
  }
  out << json{{"schema_version", header.schema_version},
              {"kind", "header"},
              {"fps", header.fps},
              {"views", views}}
             .dump()
      << '\n';

  for (const TickRecord& rec : ticks) {
    json ts = json::object();
    for (ViewId v : kAllViews) {
      if (const auto& t = rec.timestamps_us[view_index(v)]) {
        ts[std::string(to_string(v))] = *t;
      }
    }
    json line{{"tick", rec.tick}, {"timestamps_us", ts}};
    if (rec.truth) {
      line["truth"] = json{{"left", truth_to_json(rec.truth->left)},
                           {"right", truth_to_json(rec.truth->right)}};
    }
    json images = json::object();
    for (ViewId v : kAllViews) {
      if (const auto& ref = rec.image_refs[view_index(v)]) {
        images[std::string(to_string(v))] = *ref;
      }
    }
    if (!images.empty()) line["images"] = images;
    out << line.dump() << '\n';
  }
}

Manifest Manifest::load_jsonl(std::istream& in) {
  Manifest m;
  std::string line;
  std::size_t lineno = 0;

  // Header line.
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty()) break;
  }
  if (line.empty()) throw ParseError(lineno, "missing manifest header");
  try {
    const json h = json::parse(line);
    if (h.at("kind").get<std::string>() != "header") {
      throw ParseError(lineno, "first line must be the header");
    }
    m.header.schema_version = h.at("schema_version").get<int>();
    if (m.header.schema_version != kManifestSchemaVersion) {
      throw ParseError(lineno, "unsupported schema_version");
    }
    m.header.fps = h.at("fps").get<double>();
    for (const auto& entry : h.at("views")) {
      auto view = parse_view(entry.at("view").get<std::string>());
      if (!view) throw ParseError(lineno, "unknown view in header");
      m.header.width[view_index(*view)] = entry.at("width").get<int>();
      m.header.height[view_index(*view)] = entry.at("height").get<int>();
    }
  } catch (const json::exception& e) {
    throw ParseError(lineno, std::string("bad header: ") + e.what());
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t record = m.ticks.size();
    try {
      const json j = json::parse(line);
      TickRecord rec;
      rec.tick = j.at("tick").get<std::uint64_t>();
      for (const auto& [key, val] : j.at("timestamps_us").items()) {
        auto view = parse_view(key);
        if (!view) throw ManifestError(record, "unknown view '" + key + "'");
        rec.timestamps_us[view_index(*view)] = val.get<std::int64_t>();
      }
      if (j.contains("truth")) {
        TickTruth truth;
        truth.left = truth_from_json(j.at("truth").at("left"), record);
        truth.right = truth_from_json(j.at("truth").at("right"), record);
        rec.truth = std::move(truth);
      }
      if (j.contains("images")) {
        for (const auto& [key, val] : j.at("images").items()) {
          auto view = parse_view(key);
          if (!view) throw ManifestError(record, "unknown view '" + key + "'");
          rec.image_refs[view_index(*view)] = val.get<std::string>();
        }
      }
      m.ticks.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw ManifestError(record, e.what());
    }
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Scenario scripts
// ---------------------------------------------------------------------------

namespace {

std::pair<std::string, std::string> split_kv(const std::string& token,
                                             std::size_t lineno) {
  auto eq = token.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == token.size()) {
    throw ParseError(lineno, "expected key=value, got '" + token + "'");
  }
  return {token.substr(0, eq), token.substr(eq + 1)};
}

ActivityLabel parse_activity_or_throw(const std::string& value,
                                      std::size_t lineno) {
  auto label = parse_activity_label(value);
  if (!label) throw ParseError(lineno, "unknown activity '" + value + "'");
  return *label;
}

double parse_prob(const std::string& value, std::size_t lineno) {
  try {
    const double p = std::stod(value);
    if (p < 0.0 || p > 1.0) throw std::out_of_range(value);
    return p;
  } catch (const std::exception&) {
    throw ParseError(lineno, "bad probability '" + value + "'");
  }
}

ScenarioSegment parse_segment(const std::string& rest, std::size_t lineno) {
  ScenarioSegment seg;
  bool have_duration = false, have_left = false, have_right = false;
  std::istringstream tokens(rest);
  std::string token;
  while (tokens >> token) {
    auto [key, value] = split_kv(token, lineno);
    if (key == "duration") {
      try {
        seg.duration_frames = std::stoi(value);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad duration '" + value + "'");
      }
      if (seg.duration_frames <= 0) {
        throw ParseError(lineno, "duration must be positive");
      }
      have_duration = true;
    } else if (key == "left") {
      seg.left = parse_activity_or_throw(value, lineno);
      have_left = true;
    } else if (key == "right") {
      seg.right = parse_activity_or_throw(value, lineno);
      have_right = true;
    } else if (key == "drop") {
      seg.drop_prob.fill(parse_prob(value, lineno));
    } else if (key.rfind("drop.", 0) == 0) {
      auto view = parse_view(key.substr(5));
      if (!view) throw ParseError(lineno, "unknown view in '" + key + "'");
      seg.drop_prob[view_index(*view)] = parse_prob(value, lineno);
    } else if (key == "jitter_us") {
      try {
        seg.jitter_us = std::stoll(value);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad jitter '" + value + "'");
      }
      if (seg.jitter_us < 0) throw ParseError(lineno, "jitter must be >= 0");
    } else {
      throw ParseError(lineno, "unknown segment key '" + key + "'");
    }
  }
  if (!have_duration || !have_left || !have_right) {
    throw ParseError(lineno, "segment needs duration=, left=, right=");
  }
  // The left hand only has three admissible zones.
  if (seg.left.is_location()) {
    const auto admissible = admissible_classes(Hand::Left);
    if (std::find(admissible.begin(), admissible.end(), seg.left.location) ==
        admissible.end()) {
      throw ParseError(lineno, "left hand cannot be in '" +
                                   std::string(to_string(seg.left)) + "'");
    }
  }
  return seg;
}

}  // namespace

ScenarioScript ScenarioScript::parse(std::istream& in) {
  ScenarioScript script;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first)) continue;

    if (first == "segment") {
      std::string rest;
      std::getline(tokens, rest);
      script.segments.push_back(parse_segment(rest, lineno));
      continue;
    }

    // Header assignment: key = value (spaces around '=' optional).
    std::string rest;
    std::getline(tokens, rest);
    std::string stmt = first + rest;
    stmt.erase(std::remove_if(stmt.begin(), stmt.end(),
                              [](char c) { return c == ' ' || c == '\t'; }),
               stmt.end());
    auto [key, value] = split_kv(stmt, lineno);
    try {
      if (key == "fps") {
        script.fps = std::stod(value);
      } else if (key == "width") {
        script.width = std::stoi(value);
      } else if (key == "height") {
        script.height = std::stoi(value);
      } else if (key == "seed") {
        script.seed = std::stoull(value);
      } else {
        throw ParseError(lineno, "unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad value '" + value + "' for '" + key + "'");
    }
  }
  if (script.fps <= 0 || script.width <= 0 || script.height <= 0) {
    throw ParseError(lineno, "fps/width/height must be positive");
  }
  if (script.segments.empty()) {
    throw ParseError(lineno, "script has no segments");
  }
  return script;
}

ScenarioScript ScenarioScript::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("script", "cannot open '" + path + "'");
  return parse(in);
}

std::uint64_t ScenarioScript::total_frames() const {
  std::uint64_t n = 0;
  for (const auto& seg : segments) {
    n += static_cast<std::uint64_t>(seg.duration_frames);
  }
  return n;
}

// ---------------------------------------------------------------------------
// Manifest synthesis
// ---------------------------------------------------------------------------

namespace {

HandTruth make_truth(const ActivityLabel& activity, Hand hand,
                     const ScenarioScript& script) {
  HandTruth t;
  if (activity.is_object()) {
    t.object = activity.object;
    t.location = LocationClass::Air;  // fallback zone while holding something
  } else {
    t.object = ObjectClass::None;
    t.location = activity.location;
  }
  for (ViewId v : kAllViews) {
    t.wrist_px[view_index(v)] =
        wrist_layout(activity, hand, v, script.width, script.height);
  }
  return t;
}

}  // namespace

Manifest generate(const ScenarioScript& script, std::uint64_t seed_override) {
  ScenarioScript seeded = script;
  seeded.seed = seed_override;
  return generate(seeded);
}

Manifest generate(const ScenarioScript& script) {
  Manifest m;
  m.header.fps = script.fps;
  m.header.width.fill(script.width);
  m.header.height.fill(script.height);
  m.ticks.reserve(script.total_frames());

  SplitMix64 rng(script.seed);
  std::array<std::optional<std::int64_t>, kViewCount> last_ts;
  std::uint64_t tick = 0;

  for (const ScenarioSegment& seg : script.segments) {
    const HandTruth left = make_truth(seg.left, Hand::Left, script);
    const HandTruth right = make_truth(seg.right, Hand::Right, script);
    for (int i = 0; i < seg.duration_frames; ++i, ++tick) {
      TickRecord rec;
      rec.tick = tick;
      const auto base = static_cast<std::int64_t>(
          std::llround(static_cast<double>(tick) * 1e6 / script.fps));
      for (ViewId v : kAllViews) {
        const int vi = view_index(v);
        const bool dropped = rng.bernoulli(seg.drop_prob[vi]);
        if (dropped) continue;
        std::int64_t ts = base;
        if (seg.jitter_us > 0) {
          ts += rng.uniform_int(-seg.jitter_us, seg.jitter_us);
        }
        // Keep capture times at or after the epoch and strictly increasing
        // per view under jitter.
        if (ts < 0) ts = 0;
        if (last_ts[vi] && ts <= *last_ts[vi]) ts = *last_ts[vi] + 1;
        last_ts[vi] = ts;
        rec.timestamps_us[vi] = ts;
      }
      rec.truth = TickTruth{left, right};
      m.ticks.push_back(std::move(rec));
    }
  }
  return m;
}

}  // namespace smart_hands::replay
