#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "implauth/events.hpp"
#include "implauth/profile.hpp"

namespace implauth {

struct ComfortConfig {
  std::int64_t window_seconds = 60;
  std::int64_t gap_zero_seconds = 60;   // no penalty at or below this gap
  std::int64_t gap_one_seconds = 3600;  // full penalty at or above this gap
  std::int64_t utc_offset_seconds = 0;

  bool operator==(const ComfortConfig&) const = default;
};

struct SensorScoreKey {
  ModelKind model = ModelKind::temporal;
  SensorKind sensor = SensorKind::app;

  auto operator<=>(const SensorScoreKey&) const = default;
};

/// One scored window. Every level of the aggregation is exposed so a low
/// aggregate can be traced to a model and then to a sensor.
struct ComfortSample {
  Timestamp window_start = 0;
  std::map<SensorScoreKey, double> sensor_scores;
  double temporal = 0.0;
  double spatial = 0.0;
  double gap_penalty = 0.0;
  double aggregate = 0.0;
  std::size_t event_count = 0;
  int hour = 0;
  std::string location;  // spatial anchor used; empty for an eventless window

  bool operator==(const ComfortSample&) const = default;
};

/// Density score of one value; 0 when the density is absent or the variant mismatches.
double score_value(const SensorDensity* density, const SensorValue& value);

/// Mean per-input score of `inputs` under the anchor's density for `sensor`.
/// An absent anchor or density makes every input contribute 0.
double score_sensor(const Profile& snapshot, const Anchor& anchor, SensorKind sensor,
                    std::span<const SensorValue> inputs);

struct ModelScore {
  double score = 0.0;
  std::map<SensorKind, double> sensors;
};

/// Unweighted mean of the sensor scores of every sensor present in `window_events`.
ModelScore score_model(const Profile& snapshot, const Anchor& anchor,
                       std::span<const SensorEvent> window_events);

/// 0 up to gap_zero, 1 from gap_one, linear between. Throws NegativeGap.
double gap_penalty(Timestamp prev_event_ts, Timestamp current_ts, const ComfortConfig& config = {});

/// Spatial anchor of a window: majority location, ties to the latest event's.
std::string majority_location(std::span<const SensorEvent> window_events);

/// Scores one tumbling window. With no events both model scores are 0 and the
/// gap runs from `prev_event_ts` to the window end.
ComfortSample score_window(const Profile& snapshot, Timestamp window_start,
                           std::span<const SensorEvent> window_events,
                           std::optional<Timestamp> prev_event_ts, const ComfortConfig& config = {});

/// Recomputes the model means and the aggregate from a sample's exposed sensor scores.
double recompose_aggregate(const ComfortSample& sample);

}  // namespace implauth
