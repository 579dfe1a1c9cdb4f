#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "implauth/comfort.hpp"
#include "implauth/lifecycle_state.hpp"
#include "implauth/profile.hpp"
#include "implauth/stability.hpp"

namespace implauth {

struct LifecycleConfig {
  double percentile = 2.0;
  int threshold_window_days = 7;
  double convergence_threshold = 0.1;
  int consecutive_days = 2;
  double drift_breach_distance = 0.2;
  int drift_breach_days = 3;
  int drift_baseline_days = 7;
  std::int64_t retrain_window_seconds = 4 * kSecondsPerHour;

  bool operator==(const LifecycleConfig&) const = default;
};

/// Fresh record in the training phase with thresholds and drift parameters from `config`.
LifecycleRecord make_lifecycle_record(const LifecycleConfig& config);

enum class Decision { comfortable, challenge };
std::string_view to_string(Decision decision);

struct DecisionRecord {
  Timestamp window_start = 0;
  double aggregate = 0.0;
  double threshold = 0.0;
  Decision decision = Decision::comfortable;
  Phase phase = Phase::deployed;
  double temporal = 0.0;  // breakdown for explaining a challenge
  double spatial = 0.0;

  bool operator==(const DecisionRecord&) const = default;
};

enum class RetrainMode { update, fresh };
std::string_view to_string(RetrainMode mode);
RetrainMode parse_retrain_mode(std::string_view name);

/// Structured lifecycle log entry: converged, drift_suggested, retrain_started,
/// retrain_extended, retrain_expired.
struct LifecycleEvent {
  Timestamp at = 0;
  std::int64_t day = 0;
  std::string kind;
  std::string detail;

  bool operator==(const LifecycleEvent&) const = default;
};

/// Nearest-rank percentile: the value at 1-based index ceil(p/100 * N) of the ascending sort.
double nearest_rank(std::vector<double> values, double p);

/// Nearest-rank percentile of the samples' aggregates. Throws EmptyDay.
double daily_percentile(std::span<const ComfortSample> samples, double p);

/// Comfort deciles (10..90, nearest rank). Throws EmptyDay.
Deciles comfort_deciles(std::span<const ComfortSample> samples);

/// Median of the trailing `window_days` daily values. Throws NoHistory.
double current_threshold(const ThresholdState& threshold);

/// Challenge iff the aggregate is strictly below the current threshold.
DecisionRecord decide(const ComfortSample& sample, const ThresholdState& threshold,
                      Phase phase = Phase::deployed);

/// Decile distance to the baseline, ||v - b||_2 / 2.
double drift_distance(const Deciles& day, const Deciles& baseline);

/// Updates the breach counter from one day of samples and reports whether the
/// drift condition holds. Throws BaselineNotReady.
bool check_drift(DriftState& drift, std::span<const ComfortSample> day_samples);

/// Daily transition. Training and retraining test convergence on `history`;
/// deployment appends the day's percentile and updates drift. Throws DoubleClose.
std::vector<LifecycleEvent> end_of_day(LifecycleRecord& record, std::int64_t day,
                                       std::span<const DayDistance> history,
                                       std::span<const ComfortSample> day_samples,
                                       Timestamp day_end, const LifecycleConfig& config);

/// Enters retraining after explicit authentication. `fresh` discards the profile.
/// Throws NotAuthenticated.
LifecycleEvent begin_retrain(LifecycleRecord& record, RetrainMode mode, bool authenticated,
                             Timestamp now, Profile& profile, const LifecycleConfig& config);

/// Extends an open retraining window after re-authentication. Throws NotAuthenticated.
LifecycleEvent extend_retrain(LifecycleRecord& record, bool authenticated, Timestamp now,
                              const LifecycleConfig& config);

/// Returns to deployment when the retraining deadline has passed.
std::optional<LifecycleEvent> expire_retrain(LifecycleRecord& record, Timestamp now,
                                             std::int64_t day);

}  // namespace implauth
