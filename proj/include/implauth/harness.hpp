#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "implauth/config.hpp"
#include "implauth/kernels.hpp"
#include "implauth/lifecycle.hpp"

namespace implauth {

struct ReplayOptions {
  /// Authenticated retraining commands, applied at the start of the given local day.
  std::map<std::int64_t, RetrainMode> retrain_at_day;
  /// The user re-authenticates at every retraining deadline until convergence.
  bool reauthenticate = true;
  ExecPolicy policy = ExecPolicy::parallel;
  bool keep_samples = true;
};

struct DailySummary {
  std::int64_t day = 0;
  Phase phase = Phase::training;  // phase the day was scored under
  std::size_t events = 0;
  std::size_t windows = 0;
  std::size_t challenges = 0;
  double mean = 0.0;
  double p2 = 0.0;  // configured percentile of the day's comfort
  Deciles deciles{};
};

struct ReplayResult {
  Profile profile;  // the learning profile; frozen while deployed
  std::shared_ptr<const Profile> deployed;
  LifecycleRecord lifecycle;
  std::vector<DayDistance> distances;
  std::vector<DailySummary> days;
  std::vector<DecisionRecord> decisions;
  std::vector<LifecycleEvent> events;
  std::vector<ComfortSample> samples;
  std::optional<std::int64_t> converged_day;  // first deployment
};

/// Runs the full lifecycle over a sorted stream, one local day at a time. Each
/// day is scored against the deployed profile, or while learning against the
/// snapshot taken at the end of the previous day.
ReplayResult replay(std::span<const SensorEvent> events, const RunConfig& config,
                    const ReplayOptions& options = {});

/// Scores a stream against a fixed profile and threshold: one decision per
/// window from the first event's window to the last.
std::vector<DecisionRecord> score_stream(const Profile& profile, double threshold,
                                         std::span<const SensorEvent> events, const RunConfig& config,
                                         std::vector<ComfortSample>* samples = nullptr);

struct ScenarioResult {
  std::string name;
  double mean_comfort = 0.0;
  double detection_rate = 0.0;                 // challenged windows / attack windows
  std::optional<std::int64_t> time_to_detect;  // seconds, first challenge window close - start
  std::size_t windows = 0;
  std::size_t challenges = 0;
  std::vector<DailySummary> days;
  std::vector<DecisionRecord> decisions;
};

/// Scores the windows of [start, start + duration) in `stream` against a deployed
/// replay. `stream` holds whatever happened on the device from the trained
/// period onward. Throws NotDeployedBeforeAttack.
ScenarioResult evaluate_span(const ReplayResult& trained, std::span<const SensorEvent> stream,
                             Timestamp start, std::int64_t duration, const RunConfig& config,
                             std::string name);

/// Generates the attack, splices it into the owner's stream after `start` and
/// measures it over the attack span only. The owner is trained on every full
/// day before the attack day. Throws NotDeployedBeforeAttack.
ScenarioResult run_attack(const PersonaSpec& owner, std::span<const SensorEvent> owner_stream,
                          AttackKind kind, Timestamp start, std::int64_t duration,
                          const RunConfig& config, const AttackOptions& options = {});

struct DriftCaseResult {
  DriftStrategy strategy = DriftStrategy::none;
  std::int64_t move_day = 0;
  double pre_move_mean = 0.0;  // mean of the daily means of the deployed days before the move
  std::vector<DailySummary> days;
  std::vector<LifecycleEvent> events;
};

/// The owner moves city at `move_day` (offset from the persona start) and lives
/// there for `days_after` days. Throws InvalidScenario if the profile was not
/// deployed before the move.
DriftCaseResult run_drift_case(const PersonaSpec& owner, int move_day, int days_after,
                               DriftStrategy strategy, const RunConfig& config);

struct SimulationResult {
  ReplayResult owner;
  ScenarioResult control;  // the owner's own attack day, whole day
  std::vector<ScenarioResult> attacks;
  std::vector<DriftCaseResult> drift;
};

/// Runs every case of the scenario; independent cases run concurrently.
SimulationResult simulate(const Scenario& scenario, const RunConfig& config);

// CSV emitters. Reals use the shortest round-trip form so output is byte-stable.
void write_distances_csv(std::ostream& out, std::span<const DayDistance> distances);
void write_daily_csv(std::ostream& out, std::string_view scenario, std::span<const DailySummary> days,
                     bool header = true);
void write_decisions_csv(std::ostream& out, std::span<const DecisionRecord> decisions);
void write_samples_csv(std::ostream& out, std::span<const ComfortSample> samples);
void write_lifecycle_log(std::ostream& out, std::span<const LifecycleEvent> events);
void write_scenario_summary_csv(std::ostream& out, const SimulationResult& result);

/// Writes every artifact of a simulation plus manifest.json into `dir`.
/// Returns the file names written.
std::vector<std::string> write_simulation(const std::filesystem::path& dir, const Scenario& scenario,
                                          const RunConfig& config, const SimulationResult& result);

std::string_view version();

}  // namespace implauth
