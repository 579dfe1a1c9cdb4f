#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "implauth/density.hpp"
#include "implauth/events.hpp"
#include "implauth/lifecycle_state.hpp"

namespace implauth {

inline constexpr int kProfileFormatVersion = 1;

enum class ModelKind { temporal, spatial };

std::string_view to_string(ModelKind kind);

/// Conditioning context of a density: an hour slot or a location label.
struct Anchor {
  ModelKind kind = ModelKind::temporal;
  int hour = 0;          // temporal anchors
  std::string location;  // spatial anchors

  static Anchor time(int hour) { return {ModelKind::temporal, hour, {}}; }
  static Anchor place(std::string label) { return {ModelKind::spatial, 0, std::move(label)}; }

  std::string label() const;
  auto operator<=>(const Anchor&) const = default;
  bool operator==(const Anchor&) const = default;
};

using SensorDensity = std::variant<DiscreteDensity, ContinuousDensity>;

/// Densities for the sensors seen under one anchor. A sensor only appears
/// once it has been observed here.
class AnchorModel {
 public:
  void observe(SensorKind sensor, const SensorValue& value, const DensityConfig& config);
  const SensorDensity* find(SensorKind sensor) const;
  const std::map<SensorKind, SensorDensity>& densities() const { return densities_; }
  std::map<SensorKind, SensorDensity>& densities() { return densities_; }
  bool empty() const { return densities_.empty(); }

  bool operator==(const AnchorModel&) const = default;

 private:
  std::map<SensorKind, SensorDensity> densities_;
};

struct ProfileConfig {
  std::int64_t utc_offset_seconds = 0;
  DensityConfig density;

  bool operator==(const ProfileConfig&) const = default;
};

/// Twin temporal (24 hour slots) and spatial (per location) models.
class Profile {
 public:
  explicit Profile(std::string user_id = {}, ProfileConfig config = {});

  /// Observes the event under its hour and location anchors.
  /// Throws OutOfOrderEvent when the timestamp precedes the last event.
  void ingest(const SensorEvent& event);

  /// Moves the watermark forward without an event, e.g. at local midnight.
  void advance_clock(Timestamp now);

  const AnchorModel& temporal(int hour) const { return temporal_.at(static_cast<std::size_t>(hour)); }
  const AnchorModel* spatial(std::string_view location) const;
  const AnchorModel* find(const Anchor& anchor) const;
  const std::array<AnchorModel, 24>& temporal_models() const { return temporal_; }
  const std::map<std::string, AnchorModel, std::less<>>& spatial_models() const { return spatial_; }

  const std::string& user_id() const { return user_id_; }
  const ProfileConfig& config() const { return config_; }
  int days_observed() const { return days_observed_; }
  std::optional<Timestamp> last_event_ts() const { return last_event_ts_; }
  std::optional<Timestamp> watermark() const { return watermark_; }
  std::optional<std::int64_t> last_event_day() const { return last_event_day_; }
  int format_version() const { return kProfileFormatVersion; }

  const LifecycleRecord& lifecycle() const { return lifecycle_; }
  void set_lifecycle(LifecycleRecord record) { lifecycle_ = std::move(record); }

  bool operator==(const Profile&) const = default;

 private:
  friend Profile load_profile(std::string_view document);

  std::string user_id_;
  ProfileConfig config_;
  std::array<AnchorModel, 24> temporal_;
  std::map<std::string, AnchorModel, std::less<>> spatial_;
  int days_observed_ = 0;
  std::optional<Timestamp> last_event_ts_;
  std::optional<std::int64_t> last_event_day_;
  std::optional<Timestamp> watermark_;
  LifecycleRecord lifecycle_;
};

/// Immutable view of a cumulative profile at the end of a day.
struct ProfileSnapshot {
  std::int64_t day_index = 0;
  std::shared_ptr<const Profile> profile;

  const Profile& operator*() const { return *profile; }
  const Profile* operator->() const { return profile.get(); }
};

/// Deep copy of `profile` as of the end of `day_index`. Throws DayNotComplete
/// unless the profile's watermark has reached the following local midnight.
ProfileSnapshot snapshot_day(const Profile& profile, std::int64_t day_index);

/// Deep copy without the day-boundary check.
ProfileSnapshot snapshot_now(const Profile& profile, std::int64_t day_index);

/// Canonical JSON document (sorted keys); equal profiles give equal bytes.
std::string save_profile(const Profile& profile);
/// Throws VersionMismatch or CorruptDocument; never returns a partial profile.
Profile load_profile(std::string_view document);

}  // namespace implauth
