#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "implauth/comfort.hpp"
#include "implauth/lifecycle.hpp"
#include "implauth/persona.hpp"
#include "implauth/profile.hpp"
#include "implauth/stability.hpp"

namespace implauth {

/// Every tunable constant of a run. The JSON form uses the field names as keys.
struct RunConfig {
  double percentile = 2.0;
  double convergence_threshold = 0.1;
  int consecutive_days = 2;
  std::int64_t window_seconds = 60;
  std::int64_t gap_zero_seconds = 60;
  std::int64_t gap_one_seconds = 3600;
  int kde_bins = 256;
  int levenshtein_top_k = 50;
  int min_events_per_day = 50;
  double continuous_scale = 3.0;
  int threshold_window_days = 7;
  double drift_breach_distance = 0.2;
  int drift_breach_days = 3;
  int drift_baseline_days = 7;
  std::int64_t retrain_window_seconds = 4 * 3600;
  std::int64_t utc_offset_seconds = 0;
  std::uint64_t seed = 42;
  int threads = 0;  // 0 = OpenMP default

  ProfileConfig profile_config() const;
  ComfortConfig comfort_config() const;
  StabilityConfig stability_config() const;
  LifecycleConfig lifecycle_config() const;

  bool operator==(const RunConfig&) const = default;
};

/// Throws InvalidConfig when a value is outside its documented range.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys and bad types throw InvalidConfig.
RunConfig run_config_from_json(const nlohmann::json& doc);
std::string save_run_config(const RunConfig& config);
RunConfig load_run_config(std::string_view text);
/// Applies one `key=value` override; the value is read as JSON, else as a string.
void apply_override(RunConfig& config, std::string_view assignment);

nlohmann::json to_json(const PersonaSpec& spec);
/// Hours may be given as "*" for any hour. Throws InvalidSpec.
PersonaSpec persona_from_json(const nlohmann::json& doc);

struct AttackCase {
  AttackKind kind = AttackKind::uninformed_outsider;
  int day = 0;          // offset from the persona's first day
  int start_hour = 14;  // local
  std::int64_t duration_seconds = 4 * 3600;

  bool operator==(const AttackCase&) const = default;
};

enum class DriftStrategy { none, update, fresh };
std::string_view to_string(DriftStrategy strategy);
DriftStrategy parse_drift_strategy(std::string_view name);

struct DriftCase {
  int move_day = 23;    // offset from the persona's first day; a Monday
  int days_after = 14;
  std::vector<DriftStrategy> strategies{DriftStrategy::none, DriftStrategy::update,
                                        DriftStrategy::fresh};

  bool operator==(const DriftCase&) const = default;
};

struct Scenario {
  std::string name = "default";
  PersonaSpec persona;
  AttackOptions attack_options;
  std::vector<AttackCase> attacks;
  std::optional<DriftCase> drift;
};

/// Four attacks on one day of the default persona plus the move-city case,
/// using the start times of the original study.
Scenario default_scenario();

nlohmann::json to_json(const Scenario& scenario);
/// Absent `persona` means the default persona. Throws InvalidScenario.
Scenario scenario_from_json(const nlohmann::json& doc);

}  // namespace implauth
