#include "implauth/persona.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "implauth/errors.hpp"

namespace implauth {
namespace {

constexpr std::array<AttackKind, 4> kAttackKinds = {
    AttackKind::uninformed_outsider,
    AttackKind::informed_outsider,
    AttackKind::uninformed_insider,
    AttackKind::informed_insider,
};

constexpr std::array<std::string_view, 4> kAttackNames = {
    "uninformed_outsider",
    "informed_outsider",
    "uninformed_insider",
    "informed_insider",
};

double total_dwell(const LocationDwell& loc) {
  return std::accumulate(loc.dwell.begin(), loc.dwell.end(), 0.0);
}

std::set<std::string> owner_app_labels(const PersonaSpec& spec) {
  std::set<std::string> labels;
  for (const auto& [key, dist] : spec.app_habits) {
    for (const auto& [label, w] : dist) {
      if (w > 0) labels.insert(label);
    }
  }
  return labels;
}

std::string fresh_label(const std::string& base, const std::set<std::string>& taken) {
  std::string label = base;
  for (int i = 2; taken.count(label) != 0; ++i) label = base + "_" + std::to_string(i);
  return label;
}

// Minute-level event emission. Continuous sensors always emit at least one
// reading so that every minute of the run is nonempty.
void emit_minute(PersonaSampler& sampler, const PersonaSpec& spec, Timestamp minute, int hour,
                 const std::string& location, std::vector<SensorEvent>& out) {
  auto& rng = sampler.rng();
  std::poisson_distribution<int> discrete_count(spec.event_rate);
  std::poisson_distribution<int> extra_count(std::max(spec.event_rate - 1.0, 0.0));
  std::uniform_int_distribution<int> second(0, 59);

  struct Pending {
    int offset;
    SensorEvent event;
  };
  std::vector<Pending> minute_events;

  auto push = [&](SensorKind kind, SensorValue value) {
    SensorEvent e;
    e.user_id = spec.user_id;
    e.sensor = kind;
    e.value = std::move(value);
    e.location_id = location;
    minute_events.push_back({second(rng), std::move(e)});
  };

  if (!spec.app_habits.empty()) {
    const int n = discrete_count(rng);
    for (int i = 0; i < n; ++i) {
      if (const auto* label = sampler.app_label(hour, location)) push(SensorKind::app, *label);
    }
  }
  if (spec.emit_cell) {
    const int n = discrete_count(rng);
    for (int i = 0; i < n; ++i) push(SensorKind::cell, location);
  }
  for (SensorKind kind : all_sensor_kinds()) {
    if (is_discrete(kind) || !sampler.has_baseline(kind, hour)) continue;
    const int n = 1 + (spec.event_rate > 1.0 ? extra_count(rng) : 0);
    for (int i = 0; i < n; ++i) push(kind, sampler.continuous_value(kind, hour));
  }

  std::stable_sort(minute_events.begin(), minute_events.end(),
                   [](const Pending& a, const Pending& b) { return a.offset < b.offset; });
  for (auto& p : minute_events) {
    p.event.timestamp = minute + p.offset;
    out.push_back(std::move(p.event));
  }
}

}  // namespace

void validate(const PersonaSpec& spec) {
  if (spec.user_id.empty()) throw InvalidSpec("user_id must not be empty");
  if (!(spec.event_rate > 0.0) || !std::isfinite(spec.event_rate)) {
    throw InvalidSpec("event_rate must be positive");
  }
  if (spec.duration_days < 0) throw InvalidSpec("duration_days must be nonnegative");
  if (spec.start_ts < 0) throw InvalidSpec("start_ts must be nonnegative");
  if (spec.utc_offset_seconds % 60 != 0) throw InvalidSpec("utc offset must be whole minutes");
  if (spec.locations.empty()) throw InvalidSpec("at least one location is required");
  std::set<std::string> labels;
  auto check_routine = [&labels](const std::vector<LocationDwell>& routine) {
    std::set<std::string> seen;
    for (const auto& loc : routine) {
      if (loc.label.empty() || loc.label == kAnyLocation) {
        throw InvalidSpec("invalid location label '" + loc.label + "'");
      }
      if (!seen.insert(loc.label).second) throw InvalidSpec("duplicate location " + loc.label);
      labels.insert(loc.label);
      for (double p : loc.dwell) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidSpec("dwell of " + loc.label + " invalid");
      }
    }
    for (int h = 0; h < 24; ++h) {
      double sum = 0.0;
      for (const auto& loc : routine) sum += loc.dwell[h];
      if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidSpec("dwell distribution for hour " + std::to_string(h) + " sums to " +
                          std::to_string(sum));
      }
    }
  };
  check_routine(spec.locations);
  if (!spec.weekend_locations.empty()) check_routine(spec.weekend_locations);
  for (const auto& [key, dist] : spec.app_habits) {
    const auto& [hour, location] = key;
    if (hour < kAnyHour || hour > 23) throw InvalidSpec("habit hour out of range");
    if (location != kAnyLocation && labels.count(location) == 0) {
      throw InvalidSpec("habit references unknown location " + location);
    }
    double sum = 0.0;
    for (const auto& [label, w] : dist) {
      if (label.empty()) throw InvalidSpec("empty app label");
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidSpec("negative app weight");
      sum += w;
    }
    if (!(sum > 0.0)) throw InvalidSpec("app distribution has no mass");
  }
  for (const auto& [key, b] : spec.continuous_baselines) {
    const auto& [sensor, hour] = key;
    if (is_discrete(sensor)) {
      throw InvalidSpec("baseline for discrete sensor " + std::string(to_string(sensor)));
    }
    if (hour < kAnyHour || hour > 23) throw InvalidSpec("baseline hour out of range");
    if (!std::isfinite(b.mean)) throw InvalidSpec("baseline mean must be finite");
    if (!(b.stddev >= 0.0) || !std::isfinite(b.stddev)) {
      throw InvalidSpec("baseline stddev must be nonnegative");
    }
  }
}

namespace {

const LabelDistribution* owner_habit(const PersonaSpec& spec, int hour, std::string_view location) {
  const std::string loc(location);
  const std::string any(kAnyLocation);
  for (const auto& key : {std::pair{hour, loc}, std::pair{kAnyHour, loc}, std::pair{hour, any},
                          std::pair{kAnyHour, any}}) {
    auto it = spec.app_habits.find(key);
    if (it != spec.app_habits.end()) return &it->second;
  }
  return nullptr;
}

}  // namespace

PersonaSampler::PersonaSampler(const PersonaSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(seed) {
  auto build = [](const std::vector<LocationDwell>& routine, auto& table) {
    for (int h = 0; h < 24; ++h) {
      std::vector<double> weights;
      weights.reserve(routine.size());
      for (const auto& loc : routine) weights.push_back(loc.dwell[h]);
      table[h] = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
    }
  };
  build(spec.locations, dwell_);
  if (!spec.weekend_locations.empty()) build(spec.weekend_locations, weekend_dwell_);
}

const std::string& PersonaSampler::location_at(int hour, bool weekend) {
  if (weekend && !spec_.weekend_locations.empty()) {
    return spec_.weekend_locations[weekend_dwell_[hour](rng_)].label;
  }
  return spec_.locations[dwell_[hour](rng_)].label;
}

const LabelDistribution* PersonaSampler::habit_for(int hour, std::string_view location) const {
  return owner_habit(spec_, hour, location);
}

const std::string* PersonaSampler::app_label(int hour, std::string_view location) {
  const LabelDistribution* dist = habit_for(hour, location);
  if (dist == nullptr) return nullptr;
  auto it = habit_cache_.find(dist);
  if (it == habit_cache_.end()) {
    std::vector<const std::string*> labels;
    std::vector<double> weights;
    for (const auto& [label, w] : *dist) {
      labels.push_back(&label);
      weights.push_back(w);
    }
    it = habit_cache_
             .emplace(dist, std::pair{std::move(labels), std::discrete_distribution<std::size_t>(
                                                             weights.begin(), weights.end())})
             .first;
  }
  auto& [labels, draw] = it->second;
  return labels[draw(rng_)];
}

bool PersonaSampler::has_baseline(SensorKind sensor, int hour) const {
  return spec_.continuous_baselines.count({sensor, hour}) != 0 ||
         spec_.continuous_baselines.count({sensor, kAnyHour}) != 0;
}

double PersonaSampler::continuous_value(SensorKind sensor, int hour) {
  auto it = spec_.continuous_baselines.find({sensor, hour});
  if (it == spec_.continuous_baselines.end()) it = spec_.continuous_baselines.find({sensor, kAnyHour});
  if (it == spec_.continuous_baselines.end()) return 0.0;
  const Baseline& b = it->second;
  if (b.stddev == 0.0) return b.mean;
  std::normal_distribution<double> draw(b.mean, b.stddev);
  return draw(rng_);
}

std::vector<SensorEvent> generate_between(const PersonaSpec& spec, Timestamp from, Timestamp to,
                                          std::uint64_t seed) {
  validate(spec);
  std::vector<SensorEvent> out;
  if (to <= from) return out;
  out.reserve(static_cast<std::size_t>((to - from) / 60) * 6);
  PersonaSampler sampler(spec, seed);
  std::int64_t current_block = -1;
  std::string location;
  for (Timestamp minute = window_floor(from, 60); minute < to; minute += 60) {
    const std::int64_t block = floor_div(minute + spec.utc_offset_seconds, kSecondsPerHour);
    const int hour = local_hour(minute, spec.utc_offset_seconds);
    if (block != current_block) {
      current_block = block;
      location = sampler.location_at(hour, is_weekend(local_day(minute, spec.utc_offset_seconds)));
    }
    const std::size_t before = out.size();
    emit_minute(sampler, spec, minute, hour, location, out);
    // Drop the part of a partial first/last minute that falls outside [from, to).
    if (minute < from || minute + 60 > to) {
      auto first = out.begin() + static_cast<std::ptrdiff_t>(before);
      out.erase(std::remove_if(first, out.end(),
                               [&](const SensorEvent& e) {
                                 return e.timestamp < from || e.timestamp >= to;
                               }),
                out.end());
    }
  }
  return out;
}

std::vector<SensorEvent> generate_persona(const PersonaSpec& spec) {
  validate(spec);
  return generate_between(spec, spec.start_ts,
                          spec.start_ts + static_cast<Timestamp>(spec.duration_days) * kSecondsPerDay,
                          spec.seed);
}

std::string_view to_string(AttackKind kind) { return kAttackNames[static_cast<std::size_t>(kind)]; }

AttackKind parse_attack_kind(std::string_view name) {
  for (std::size_t i = 0; i < kAttackNames.size(); ++i) {
    if (kAttackNames[i] == name) return kAttackKinds[i];
  }
  throw InvalidScenario("unknown attack kind '" + std::string(name) + "'");
}

std::span<const AttackKind> all_attack_kinds() { return kAttackKinds; }

std::string modal_location(const PersonaSpec& owner, int hour) {
  validate(owner);
  if (hour != kAnyHour && (hour < 0 || hour > 23)) throw InvalidSpec("hour out of range");
  auto mass = [hour](const LocationDwell& loc) {
    return hour == kAnyHour ? total_dwell(loc) : loc.dwell[static_cast<std::size_t>(hour)];
  };
  const auto it = std::max_element(owner.locations.begin(), owner.locations.end(),
                                   [&](const LocationDwell& a, const LocationDwell& b) {
                                     return mass(a) < mass(b);
                                   });
  return it->label;
}

std::string infrequent_location(const PersonaSpec& owner) {
  validate(owner);
  const LocationDwell* best = nullptr;
  for (const auto& loc : owner.locations) {
    const double mass = total_dwell(loc);
    if (mass > 0.0 && (best == nullptr || mass < total_dwell(*best))) best = &loc;
  }
  return best->label;
}

PersonaSpec attacker_persona(const PersonaSpec& owner, AttackKind kind, const AttackOptions& options) {
  validate(owner);
  PersonaSpec atk;
  atk.user_id = owner.user_id;
  atk.seed = owner.seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(kind) + 1));
  atk.start_ts = owner.start_ts;
  atk.duration_days = owner.duration_days;
  atk.event_rate = owner.event_rate;
  atk.utc_offset_seconds = owner.utc_offset_seconds;
  atk.emit_cell = owner.emit_cell;

  const bool outsider =
      kind == AttackKind::uninformed_outsider || kind == AttackKind::informed_outsider;
  const bool informed =
      kind == AttackKind::informed_outsider || kind == AttackKind::informed_insider;

  std::set<std::string> owner_locations;
  for (const auto& loc : owner.locations) owner_locations.insert(loc.label);
  for (const auto& loc : owner.weekend_locations) owner_locations.insert(loc.label);

  if (outsider) {
    LocationDwell home{fresh_label("outsider_home", owner_locations), {}};
    LocationDwell work{fresh_label("outsider_work", owner_locations), {}};
    for (int h = 0; h < 24; ++h) {
      const bool daytime = h >= 8 && h < 18;
      home.dwell[h] = daytime ? 0.0 : 1.0;
      work.dwell[h] = daytime ? 1.0 : 0.0;
    }
    atk.locations = {home, work};
  } else if (kind == AttackKind::uninformed_insider) {
    LocationDwell place{infrequent_location(owner), {}};
    place.dwell.fill(1.0);
    atk.locations = {place};
  } else {
    // Knows the routine: always where the owner usually is at that hour.
    for (const auto& loc : owner.locations) atk.locations.push_back({loc.label, {}});
    for (int h = 0; h < 24; ++h) {
      const auto label = modal_location(owner, h);
      for (auto& loc : atk.locations) loc.dwell[static_cast<std::size_t>(h)] = loc.label == label ? 1.0 : 0.0;
    }
    std::erase_if(atk.locations, [](const LocationDwell& loc) { return total_dwell(loc) == 0.0; });
  }

  LabelDistribution apps;
  const auto owner_apps = owner_app_labels(owner);
  if (informed) {
    // Knows which apps the owner uses at each hour of a weekday, not where.
    for (int h = 0; h < 24; ++h) {
      LabelDistribution mix;
      for (const auto& loc : owner.locations) {
        const double dwell = loc.dwell[static_cast<std::size_t>(h)];
        const LabelDistribution* dist = dwell > 0.0 ? owner_habit(owner, h, loc.label) : nullptr;
        if (dist == nullptr) continue;
        double sum = 0.0;
        for (const auto& [label, w] : *dist) sum += w;
        for (const auto& [label, w] : *dist) mix[label] += dwell * w / sum;
      }
      if (!mix.empty()) atk.app_habits[{h, std::string(kAnyLocation)}] = std::move(mix);
    }
  } else {
    constexpr std::array<double, 5> weights = {0.35, 0.25, 0.2, 0.12, 0.08};
    std::set<std::string> taken = owner_apps;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const auto label = fresh_label("attacker.app" + std::to_string(i + 1), taken);
      taken.insert(label);
      apps[label] = weights[i];
    }
  }
  if (!apps.empty()) atk.app_habits[{kAnyHour, std::string(kAnyLocation)}] = apps;

  for (const auto& [key, b] : owner.continuous_baselines) {
    const double scale = b.stddev > 0.0 ? b.stddev : std::max(1.0, 0.25 * std::abs(b.mean));
    atk.continuous_baselines[key] = {b.mean + options.baseline_shift_sd * scale, b.stddev};
  }
  return atk;
}

std::vector<SensorEvent> generate_attack(const PersonaSpec& owner, AttackKind kind, Timestamp start,
                                         std::int64_t duration, const AttackOptions& options) {
  validate(owner);
  if (start <= owner.start_ts) throw InvalidSpec("attack must start after the owner stream begins");
  if (duration <= 0) throw InvalidSpec("attack duration must be positive");
  const PersonaSpec atk = attacker_persona(owner, kind, options);
  return generate_between(atk, start, start + duration, atk.seed);
}

PersonaSpec moved_persona(const PersonaSpec& owner, std::string_view prefix) {
  validate(owner);
  PersonaSpec moved = owner;
  moved.seed = owner.seed + 0x5851F42D4C957F2DULL;
  for (auto& loc : moved.locations) loc.label = std::string(prefix) + loc.label;
  for (auto& loc : moved.weekend_locations) loc.label = std::string(prefix) + loc.label;
  moved.app_habits.clear();
  for (const auto& [key, dist] : owner.app_habits) {
    const auto& [hour, location] = key;
    const std::string label =
        location == kAnyLocation ? location : std::string(prefix) + location;
    moved.app_habits[{hour, label}] = dist;
  }
  return moved;
}

PersonaSpec default_persona() {
  PersonaSpec p;
  p.user_id = "owner";
  p.seed = 42;
  p.start_ts = 1370044800;  // Saturday 2013-06-01 00:00 UTC
  p.duration_days = 35;
  p.event_rate = 1.0;

  LocationDwell home{"home", {}};
  LocationDwell work{"work", {}};
  LocationDwell cafe{"cafe", {}};
  for (int h = 0; h < 24; ++h) {
    double w = 0.0;
    double c = 0.0;
    if (h == 8) {
      w = 0.4;
    } else if (h >= 9 && h <= 11) {
      w = 0.9;
    } else if (h == 12) {
      w = 0.4;
      c = 0.6;
    } else if (h == 13) {
      w = 0.7;
      c = 0.3;
    } else if (h >= 14 && h <= 16) {
      w = 0.95;
    } else if (h == 17) {
      w = 0.5;
    } else if (h == 19) {
      c = 0.1;
    }
    work.dwell[h] = w;
    cafe.dwell[h] = c;
    home.dwell[h] = 1.0 - w - c;
  }
  p.locations = {home, work, cafe};

  // Weekends: home, a morning at the gym, brunch at the cafe.
  LocationDwell w_home{"home", {}};
  LocationDwell w_cafe{"cafe", {}};
  LocationDwell w_gym{"gym", {}};
  for (int h = 0; h < 24; ++h) {
    double g = 0.0;
    double c = 0.0;
    if (h == 10 || h == 11) {
      g = 0.6;
    } else if (h == 12 || h == 13) {
      c = 0.5;
    } else if (h == 16) {
      c = 0.2;
    }
    w_gym.dwell[h] = g;
    w_cafe.dwell[h] = c;
    w_home.dwell[h] = 1.0 - g - c;
  }
  p.weekend_locations = {w_home, w_cafe, w_gym};

  // A head of habitual apps plus a long tail of occasional ones.
  LabelDistribution tail;
  const std::array<const char*, 8> occasional = {"maps",  "camera", "banking", "shopping",
                                                 "notes", "photos", "browser", "translate"};
  for (std::size_t i = 0; i < occasional.size(); ++i) tail[occasional[i]] = 0.04 * std::pow(0.75, i);
  auto with_tail = [&](LabelDistribution head) {
    for (const auto& [label, w] : tail) head[label] += w;
    return head;
  };
  p.app_habits[{kAnyHour, "home"}] = with_tail(
      {{"mail", 0.3}, {"news", 0.22}, {"video", 0.18}, {"game", 0.1}, {"weather", 0.06}});
  p.app_habits[{kAnyHour, "work"}] = with_tail(
      {{"mail", 0.4}, {"docs", 0.26}, {"chat", 0.13}, {"calendar", 0.07}});
  p.app_habits[{kAnyHour, "cafe"}] = {{"social", 0.45}, {"news", 0.3}, {"music", 0.25}};
  p.app_habits[{kAnyHour, "gym"}] = {{"music", 0.6}, {"fitness", 0.4}};
  for (int h = 0; h <= 5; ++h) p.app_habits[{h, "home"}] = {{"alarm", 0.7}, {"podcast", 0.3}};

  for (int h = 0; h < 24; ++h) {
    Baseline light;
    Baseline noise;
    if (h <= 6) {
      light = {3.0, 1.5};
      noise = {28.0, 3.0};
    } else if (h <= 8) {
      light = {150.0, 40.0};
      noise = {50.0, 6.0};
    } else if (h <= 17) {
      light = {400.0, 80.0};
      noise = {55.0, 7.0};
    } else if (h <= 21) {
      light = {120.0, 30.0};
      noise = {45.0, 6.0};
    } else {
      light = {10.0, 4.0};
      noise = {35.0, 4.0};
    }
    p.continuous_baselines[{SensorKind::light, h}] = light;
    p.continuous_baselines[{SensorKind::noise, h}] = noise;
  }
  p.continuous_baselines[{SensorKind::cpu, kAnyHour}] = {22.0, 6.0};
  return p;
}

}  // namespace implauth
