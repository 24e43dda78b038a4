#include <chrono>
#include <ostream>

#include "smart_hands/errors.hpp"
#include "smart_hands/replay.hpp"

namespace smart_hands::replay {

namespace {

using nlohmann::json;

std::vector<std::string> object_label_names() {
  std::vector<std::string> names;
  for (ObjectClass c : kAllObjectClasses) names.emplace_back(to_string(c));
  return names;
}

std::vector<std::string> location_label_names(Hand hand) {
  std::vector<std::string> names;
  for (LocationClass c : admissible_classes(hand)) {
    names.emplace_back(to_string(c));
  }
  return names;
}

json matrix_to_json(const eval::ConfusionMatrix& m) {
  json counts = json::array();
  for (std::size_t r = 0; r < m.size(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.size(); ++c) row.push_back(m.at(r, c));
    counts.push_back(std::move(row));
  }
  return json{{"labels", m.labels()}, {"counts", std::move(counts)}};
}

json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json hand_to_json(const HandScore& score) {
  return json{{"object_matrix", matrix_to_json(score.object_matrix)},
              {"location_matrix", matrix_to_json(score.location_matrix)},
              {"object_accuracy", optional_to_json(score.object_accuracy())},
              {"location_accuracy",
               optional_to_json(score.location_accuracy())},
              {"unknown_ticks", score.unknown_ticks},
              {"unseen_ticks", score.unseen_ticks}};
}

json event_to_json(const alerting::AlertEvent& e) {
  auto label_str = [](const std::optional<ActivityLabel>& l) {
    return l ? std::string(to_string(*l)) : std::string("unknown");
  };
  return json{{"onset_tick", e.onset_tick},
              {"onset_timestamp_us", e.onset_timestamp_us},
              {"left_label", label_str(e.left_label)},
              {"right_label", label_str(e.right_label)}};
}

}  // namespace

HandScore::HandScore(Hand hand)
    : object_matrix(object_label_names()),
      location_matrix(location_label_names(hand)) {}

std::optional<double> HandScore::object_accuracy() const {
  if (object_matrix.total() == 0) return std::nullopt;
  return object_matrix.accuracy();
}

std::optional<double> HandScore::location_accuracy() const {
  if (location_matrix.total() == 0) return std::nullopt;
  return location_matrix.accuracy();
}

json RunReport::to_json(bool include_timing) const {
  json stream_json = json::object();
  for (ViewId v : kAllViews) {
    const int vi = view_index(v);
    stream_json[std::string(to_string(v))] =
        json{{"ingested", stream.ingested[vi]},
             {"accepted", stream.accepted[vi]},
             {"dropped_late", stream.dropped_late[vi]},
             {"dropped_duplicate", stream.dropped_duplicate[vi]}};
  }
  json events_json = json::array();
  for (const auto& e : events) events_json.push_back(event_to_json(e));

  json out{{"schema_version", schema_version},
           {"manifest_ticks", manifest_ticks},
           {"truth_ticks", truth_ticks},
           {"sets_emitted", sets_emitted},
           {"hands",
            json{{"left", hand_to_json(left)}, {"right", hand_to_json(right)}}},
           {"alerts", std::move(events_json)},
           {"stream_stats", std::move(stream_json)}};
  if (include_timing) out["ticks_per_second"] = ticks_per_second;
  return out;
}

namespace {

void score_hand(HandScore& score, const HandTruth& truth,
                const std::optional<perception::HandState>& state) {
  if (!state) {
    ++score.unknown_ticks;
    return;
  }
  const ObjectClass pred_obj = state->object_probs.argmax();
  score.object_matrix.add(static_cast<std::size_t>(truth.object),
                          static_cast<std::size_t>(pred_obj));
  // Location task: only ticks where truth and prediction both reached the
  // location stage line up for zone scoring.
  if (truth.object == ObjectClass::None && pred_obj == ObjectClass::None &&
      state->location_probs) {
    const auto true_idx =
        score.location_matrix.index_of(to_string(truth.location));
    const auto pred_idx = score.location_matrix.index_of(
        to_string(state->location_probs->argmax()));
    score.location_matrix.add(*true_idx, *pred_idx);
  }
}

}  // namespace

RunReport run(const Manifest& manifest, const PipelineConfig& cfg,
              const std::array<perception::SeatROI, kViewCount>& rois,
              perception::InferenceBackends& backends,
              const RunOptions& options) {
  manifest.validate();
  validate_config(cfg);

  RunReport report;
  report.manifest_ticks = manifest.ticks.size();
  for (const auto& rec : manifest.ticks) {
    if (rec.truth) ++report.truth_ticks;
  }

  sync::StreamSynchronizer synchronizer(cfg);
  alerting::TemporalSmoother smoother(cfg.smoothing_window);
  alerting::AlertMachine machine(cfg);

  std::uint64_t scored_ticks = 0;
  std::vector<bool> record_scored(manifest.ticks.size(), false);

  auto handle_set = [&](const sync::SyncedFrameSet& set) {
    ++report.sets_emitted;
    perception::TickStates states =
        perception::process_tick(set, rois, cfg, backends);

    // Alerting consumes smoothed states; scoring uses the raw per-tick
    // predictions the smoothing is meant to clean up.
    alerting::SmoothedState smoothed = smoother.push(states);
    if (auto event = machine.step(smoothed)) {
      if (options.events_out) {
        *options.events_out << alerting::to_jsonl(*event) << '\n';
        options.events_out->flush();
      }
      report.events.push_back(std::move(*event));
    }

    // Jitter can split one manifest tick across two emitted sets; only the
    // first one is scored so truth ticks are counted exactly once.
    const std::size_t record = manifest.tick_of(set.reference_timestamp_us);
    const auto& truth = manifest.ticks[record].truth;
    if (truth && !record_scored[record]) {
      record_scored[record] = true;
      score_hand(report.left, truth->left, states.left);
      score_hand(report.right, truth->right, states.right);
      ++scored_ticks;
    }
  };

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < manifest.ticks.size(); ++i) {
    const TickRecord& rec = manifest.ticks[i];
    for (ViewId v : kAllViews) {
      const int vi = view_index(v);
      if (!rec.timestamps_us[vi]) continue;
      Frame frame = Frame::blank(v, *rec.timestamps_us[vi],
                                 manifest.header.width[vi],
                                 manifest.header.height[vi]);
      std::vector<sync::SyncedFrameSet> ready;
      try {
        ready = synchronizer.ingest(std::move(frame));
      } catch (const Error& e) {
        throw ManifestError(i, e.what());
      }
      for (const auto& set : ready) handle_set(set);
    }
  }
  for (const auto& set : synchronizer.flush()) handle_set(set);
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  report.stream = synchronizer.stats();
  report.left.unseen_ticks = report.truth_ticks - scored_ticks;
  report.right.unseen_ticks = report.truth_ticks - scored_ticks;
  report.ticks_per_second =
      elapsed > 0 ? static_cast<double>(report.sets_emitted) / elapsed : 0.0;
  return report;
}

}  // namespace smart_hands::replay
