#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "implauth/time.hpp"

namespace implauth {

enum class Phase { training, deployed, retraining };

std::string_view to_string(Phase phase);
/// Throws CorruptDocument for unknown names.
Phase parse_phase(std::string_view name);

struct LifecycleState {
  Phase phase = Phase::training;
  std::optional<Timestamp> retrain_deadline;  // set iff phase == retraining
  std::optional<std::int64_t> deployed_since;  // local day index

  bool operator==(const LifecycleState&) const = default;
};

struct ThresholdState {
  double percentile = 2.0;
  int window_days = 7;
  std::vector<std::pair<std::int64_t, double>> daily;  // (day, percentile comfort)
  double current = 0.0;                                 // meaningful once daily is nonempty

  bool has_history() const { return !daily.empty(); }
  bool operator==(const ThresholdState&) const = default;
};

using Deciles = std::array<double, 9>;

struct DriftState {
  std::optional<Deciles> baseline;
  std::vector<Deciles> baseline_days;  // collected until the baseline is ready
  int consecutive_breaches = 0;
  double breach_distance = 0.2;
  int breach_days = 3;
  int baseline_days_required = 7;
  double last_distance = 0.0;

  bool operator==(const DriftState&) const = default;
};

/// Everything the lifecycle persists alongside a profile.
struct LifecycleRecord {
  LifecycleState state;
  ThresholdState threshold;
  DriftState drift;
  std::optional<std::int64_t> last_closed_day;

  bool operator==(const LifecycleRecord&) const = default;
};

}  // namespace implauth
