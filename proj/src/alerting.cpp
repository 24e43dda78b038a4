#include "smart_hands/alerting.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "smart_hands/errors.hpp"

namespace smart_hands::alerting {

namespace {

/// Mean of the given vectors, summed oldest to newest. All inputs share one
/// label layout. Renormalizes only on tolerance-violating drift.
template <typename Label>
ProbVector<Label> mean_vectors(
    const std::vector<const ProbVector<Label>*>& vecs) {
  ProbVector<Label> out;
  out.labels = vecs.front()->labels;
  out.probs.assign(out.labels.size(), 0.0);
  for (const auto* v : vecs) {
    for (std::size_t i = 0; i < out.probs.size(); ++i) {
      out.probs[i] += v->probs[i];
    }
  }
  const double n = static_cast<double>(vecs.size());
  double sum = 0.0;
  for (double& p : out.probs) {
    p /= n;
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance && sum > 0.0) {
    for (double& p : out.probs) p /= sum;
  }
  return out;
}

SmoothedHand smooth_hand(std::span<const perception::TickStates> window,
                         Hand hand) {
  std::vector<const ObjectProbs*> object_vecs;
  std::vector<const LocationProbs*> location_vecs;
  for (const auto& tick : window) {
    const auto& state = tick.hand(hand);
    if (!state) continue;
    object_vecs.push_back(&state->object_probs);
    if (state->location_probs) location_vecs.push_back(&*state->location_probs);
  }

  SmoothedHand out;
  if (object_vecs.empty()) return out;  // Unknown throughout the window

  out.object_probs = mean_vectors(object_vecs);
  if (!location_vecs.empty()) {
    out.location_probs = mean_vectors(location_vecs);
  }

  const ObjectClass obj = out.object_probs->argmax();
  if (obj != ObjectClass::None) {
    out.label = ActivityLabel::of(obj);
  } else if (out.location_probs) {
    out.label = ActivityLabel::of(out.location_probs->argmax());
  }
  // else: smoothed to an empty hand with no location data -> label stays
  // Unknown.
  return out;
}

}  // namespace

SmoothedState smooth(std::span<const perception::TickStates> history,
                     int window) {
  if (window < 1) throw std::invalid_argument("smooth: window must be >= 1");
  if (history.empty()) throw std::invalid_argument("smooth: empty history");

  const std::size_t take =
      std::min(history.size(), static_cast<std::size_t>(window));
  const auto recent = history.subspan(history.size() - take, take);

  SmoothedState out;
  out.tick_index = history.back().tick_index;
  out.timestamp_us = history.back().timestamp_us;
  out.left = smooth_hand(recent, Hand::Left);
  out.right = smooth_hand(recent, Hand::Right);
  return out;
}

TemporalSmoother::TemporalSmoother(int window) : size_(window) {
  if (window < 1) {
    throw ConfigError("smoothing_window", "must be >= 1");
  }
}

SmoothedState TemporalSmoother::push(perception::TickStates tick) {
  window_.push_back(std::move(tick));
  if (window_.size() > static_cast<std::size_t>(size_)) window_.pop_front();
  std::vector<perception::TickStates> contiguous(window_.begin(),
                                                 window_.end());
  return smooth(contiguous, size_);
}

bool default_predicate(const ActivityLabel& left, const ActivityLabel& right) {
  if (left.is_object() || right.is_object()) return true;
  const bool left_on_wheel =
      left.is_location() && left.location == LocationClass::Wheel;
  const bool right_on_wheel =
      right.is_location() && right.location == LocationClass::Wheel;
  return !left_on_wheel && !right_on_wheel;
}

bool object_only_predicate(const ActivityLabel& left,
                           const ActivityLabel& right) {
  return left.is_object() || right.is_object();
}

DistractionPredicate find_predicate(std::string_view id) {
  if (id == "wheel_or_object") return &default_predicate;
  if (id == "object_only") return &object_only_predicate;
  throw ConfigError("distraction_predicate",
                    "unknown predicate '" + std::string(id) + "'");
}

std::string to_jsonl(const AlertEvent& event) {
  auto label_str = [](const std::optional<ActivityLabel>& l) {
    return l ? std::string(to_string(*l)) : std::string("unknown");
  };
  nlohmann::json j{{"onset_tick", event.onset_tick},
                   {"onset_timestamp_us", event.onset_timestamp_us},
                   {"left_label", label_str(event.left_label)},
                   {"right_label", label_str(event.right_label)}};
  return j.dump();
}

AlertMachine::AlertMachine(const PipelineConfig& cfg)
    : threshold_(cfg.alert_threshold),
      cooldown_(cfg.alert_cooldown),
      unknown_distracts_(cfg.unknown_hands_distract),
      predicate_(find_predicate(cfg.distraction_predicate)) {}

bool AlertMachine::is_distracted(const SmoothedState& state) const {
  if (!state.left.label || !state.right.label) return unknown_distracts_;
  return predicate_(*state.left.label, *state.right.label);
}

std::optional<AlertEvent> AlertMachine::step(const SmoothedState& state) {
  const bool distracted = is_distracted(state);

  if (state_ == State::Alerted) {
    if (!distracted) {
      state_ = State::Monitoring;
      consecutive_distracted_ = 0;
      cooldown_remaining_ = 0;
    } else if (--cooldown_remaining_ <= 0) {
      state_ = State::Monitoring;
      consecutive_distracted_ = 0;
      cooldown_remaining_ = 0;
    }
    return std::nullopt;
  }

  if (!distracted) {
    state_ = State::Monitoring;
    consecutive_distracted_ = 0;
    return std::nullopt;
  }

  state_ = State::Tracking;
  ++consecutive_distracted_;
  if (consecutive_distracted_ < threshold_) return std::nullopt;

  // Threshold reached: emit exactly one event and enter cooldown.
  consecutive_distracted_ = threshold_;
  state_ = State::Alerted;
  cooldown_remaining_ = cooldown_;
  AlertEvent event;
  event.onset_tick = state.tick_index;
  event.onset_timestamp_us = state.timestamp_us;
  event.left_label = state.left.label;
  event.right_label = state.right.label;
  event.duration_so_far = threshold_;
  return event;
}

}  // namespace smart_hands::alerting
