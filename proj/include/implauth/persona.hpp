#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "implauth/events.hpp"

namespace implauth {

/// Wildcards for habit and baseline keys.
inline constexpr int kAnyHour = -1;
inline constexpr std::string_view kAnyLocation = "*";

struct LocationDwell {
  std::string label;
  std::array<double, 24> dwell{};  // probability of being here at each hour

  bool operator==(const LocationDwell&) const = default;
};

using LabelDistribution = std::map<std::string, double>;

struct Baseline {
  double mean = 0.0;
  double stddev = 0.0;

  bool operator==(const Baseline&) const = default;
};

/// Declarative description of a synthetic device owner.
struct PersonaSpec {
  std::string user_id = "owner";
  std::uint64_t seed = 1;
  Timestamp start_ts = 0;
  int duration_days = 1;
  double event_rate = 1.0;  // mean events per minute per sensor
  std::int64_t utc_offset_seconds = 0;
  bool emit_cell = true;    // emit a `cell` event whose label is the current location
  std::vector<LocationDwell> locations;
  std::vector<LocationDwell> weekend_locations;  // Saturday and Sunday; empty means as weekdays
  std::map<std::pair<int, std::string>, LabelDistribution> app_habits;
  std::map<std::pair<SensorKind, int>, Baseline> continuous_baselines;

  bool operator==(const PersonaSpec&) const = default;
};

/// Throws InvalidSpec when a dwell column does not sum to one, a stddev is
/// negative, the event rate is not positive, or a key is out of range.
void validate(const PersonaSpec& spec);

/// Per-draw sampling primitives shared by the generators.
class PersonaSampler {
 public:
  PersonaSampler(const PersonaSpec& spec, std::uint64_t seed);

  const std::string& location_at(int hour, bool weekend = false);
  /// nullptr when no habit covers (hour, location).
  const std::string* app_label(int hour, std::string_view location);
  double continuous_value(SensorKind sensor, int hour);
  bool has_baseline(SensorKind sensor, int hour) const;
  std::mt19937_64& rng() { return rng_; }

 private:
  const LabelDistribution* habit_for(int hour, std::string_view location) const;

  const PersonaSpec& spec_;
  std::mt19937_64 rng_;
  std::array<std::discrete_distribution<std::size_t>, 24> dwell_;
  std::array<std::discrete_distribution<std::size_t>, 24> weekend_dwell_;
  std::map<const LabelDistribution*, std::pair<std::vector<const std::string*>,
                                               std::discrete_distribution<std::size_t>>>
      habit_cache_;
};

/// Deterministic owner stream covering [start_ts, start_ts + duration_days).
std::vector<SensorEvent> generate_persona(const PersonaSpec& spec);

/// Stream for an arbitrary interval, minute by minute; location is drawn once per
/// local hour block from the dwell distribution.
std::vector<SensorEvent> generate_between(const PersonaSpec& spec, Timestamp from, Timestamp to,
                                          std::uint64_t seed);

enum class AttackKind { uninformed_outsider, informed_outsider, uninformed_insider, informed_insider };

std::string_view to_string(AttackKind kind);
/// Throws InvalidScenario for unknown names.
AttackKind parse_attack_kind(std::string_view name);
std::span<const AttackKind> all_attack_kinds();

struct AttackOptions {
  double baseline_shift_sd = 1.5;  // attacker mean offset in owner stddevs
};

/// The owner location with the largest dwell mass, over the day or at one hour.
std::string modal_location(const PersonaSpec& owner, int hour = kAnyHour);
/// The owner location with the smallest positive total dwell mass.
std::string infrequent_location(const PersonaSpec& owner);

PersonaSpec attacker_persona(const PersonaSpec& owner, AttackKind kind,
                             const AttackOptions& options = {});

std::vector<SensorEvent> generate_attack(const PersonaSpec& owner, AttackKind kind, Timestamp start,
                                         std::int64_t duration, const AttackOptions& options = {});

/// The same owner after moving city: every location is relabelled and the app
/// habits follow the new labels. Continuous baselines are unchanged.
PersonaSpec moved_persona(const PersonaSpec& owner, std::string_view prefix = "moved_");

/// Stationary three-location routine used by the acceptance fixtures.
PersonaSpec default_persona();

}  // namespace implauth
