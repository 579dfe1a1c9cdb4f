#include "implauth/comfort.hpp"

#include <algorithm>
#include <vector>

#include "implauth/errors.hpp"

namespace implauth {

double score_value(const SensorDensity* density, const SensorValue& value) {
  if (density == nullptr) return 0.0;
  if (const auto* d = std::get_if<DiscreteDensity>(density)) {
    const auto* label = std::get_if<std::string>(&value);
    return label != nullptr ? d->score(*label) : 0.0;
  }
  const auto* x = std::get_if<double>(&value);
  return x != nullptr ? std::get<ContinuousDensity>(*density).score(*x) : 0.0;
}

double score_sensor(const Profile& snapshot, const Anchor& anchor, SensorKind sensor,
                    std::span<const SensorValue> inputs) {
  if (inputs.empty()) return 0.0;
  const AnchorModel* model = snapshot.find(anchor);
  const SensorDensity* density = model != nullptr ? model->find(sensor) : nullptr;
  double sum = 0.0;
  for (const auto& v : inputs) sum += score_value(density, v);
  return sum / static_cast<double>(inputs.size());
}

ModelScore score_model(const Profile& snapshot, const Anchor& anchor,
                       std::span<const SensorEvent> window_events) {
  ModelScore out;
  if (window_events.empty()) return out;
  const AnchorModel* model = snapshot.find(anchor);
  struct Tally {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<SensorKind, Tally> tallies;
  for (const auto& e : window_events) {
    const SensorDensity* density = model != nullptr ? model->find(e.sensor) : nullptr;
    auto& t = tallies[e.sensor];
    t.sum += score_value(density, e.value);
    ++t.n;
  }
  double total = 0.0;
  for (const auto& [sensor, t] : tallies) {
    const double s = t.sum / static_cast<double>(t.n);
    out.sensors.emplace(sensor, s);
    total += s;
  }
  out.score = total / static_cast<double>(out.sensors.size());
  return out;
}

double gap_penalty(Timestamp prev_event_ts, Timestamp current_ts, const ComfortConfig& config) {
  if (current_ts < prev_event_ts) throw NegativeGap("current reading precedes previous reading");
  const std::int64_t gap = current_ts - prev_event_ts;
  if (gap <= config.gap_zero_seconds) return 0.0;
  if (gap >= config.gap_one_seconds) return 1.0;
  return static_cast<double>(gap - config.gap_zero_seconds) /
         static_cast<double>(config.gap_one_seconds - config.gap_zero_seconds);
}

std::string majority_location(std::span<const SensorEvent> window_events) {
  std::map<std::string_view, std::pair<std::size_t, std::size_t>> tally;  // count, last index
  for (std::size_t i = 0; i < window_events.size(); ++i) {
    auto& t = tally[window_events[i].location_id];
    ++t.first;
    t.second = i;
  }
  std::string_view best;
  std::pair<std::size_t, std::size_t> best_t{0, 0};
  for (const auto& [loc, t] : tally) {
    if (t.first > best_t.first || (t.first == best_t.first && t.second > best_t.second)) {
      best = loc;
      best_t = t;
    }
  }
  return std::string(best);
}

ComfortSample score_window(const Profile& snapshot, Timestamp window_start,
                           std::span<const SensorEvent> window_events,
                           std::optional<Timestamp> prev_event_ts, const ComfortConfig& config) {
  ComfortSample s;
  s.window_start = window_start;
  s.hour = local_hour(window_start, config.utc_offset_seconds);
  s.event_count = window_events.size();

  if (!window_events.empty()) {
    s.location = majority_location(window_events);
    const ModelScore temporal = score_model(snapshot, Anchor::time(s.hour), window_events);
    const ModelScore spatial = score_model(snapshot, Anchor::place(s.location), window_events);
    for (const auto& [sensor, v] : temporal.sensors) s.sensor_scores[{ModelKind::temporal, sensor}] = v;
    for (const auto& [sensor, v] : spatial.sensors) s.sensor_scores[{ModelKind::spatial, sensor}] = v;
    s.temporal = temporal.score;
    s.spatial = spatial.score;
  }
  if (prev_event_ts) {
    const Timestamp current =
        window_events.empty() ? window_start + config.window_seconds : window_events.front().timestamp;
    s.gap_penalty = gap_penalty(*prev_event_ts, current, config);
  }
  s.aggregate = (s.temporal + s.spatial) / 2.0 - s.gap_penalty;
  return s;
}

double recompose_aggregate(const ComfortSample& sample) {
  double sums[2] = {0.0, 0.0};
  std::size_t counts[2] = {0, 0};
  for (const auto& [key, v] : sample.sensor_scores) {
    const auto m = static_cast<std::size_t>(key.model);
    sums[m] += v;
    ++counts[m];
  }
  const double temporal = counts[0] ? sums[0] / static_cast<double>(counts[0]) : 0.0;
  const double spatial = counts[1] ? sums[1] / static_cast<double>(counts[1]) : 0.0;
  return (temporal + spatial) / 2.0 - sample.gap_penalty;
}

}  // namespace implauth
