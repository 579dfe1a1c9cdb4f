#include "implauth/config.hpp"

#include <cmath>

#include "implauth/errors.hpp"

namespace implauth {

using nlohmann::json;

ProfileConfig RunConfig::profile_config() const {
  ProfileConfig p;
  p.utc_offset_seconds = utc_offset_seconds;
  p.density.bins = kde_bins;
  return p;
}

ComfortConfig RunConfig::comfort_config() const {
  return {window_seconds, gap_zero_seconds, gap_one_seconds, utc_offset_seconds};
}

StabilityConfig RunConfig::stability_config() const {
  StabilityConfig s;
  s.top_k = static_cast<std::size_t>(levenshtein_top_k);
  s.continuous_scale = continuous_scale;
  s.convergence_threshold = convergence_threshold;
  s.consecutive_days = consecutive_days;
  s.min_events_per_day = static_cast<std::size_t>(min_events_per_day);
  return s;
}

LifecycleConfig RunConfig::lifecycle_config() const {
  LifecycleConfig l;
  l.percentile = percentile;
  l.threshold_window_days = threshold_window_days;
  l.convergence_threshold = convergence_threshold;
  l.consecutive_days = consecutive_days;
  l.drift_breach_distance = drift_breach_distance;
  l.drift_breach_days = drift_breach_days;
  l.drift_baseline_days = drift_baseline_days;
  l.retrain_window_seconds = retrain_window_seconds;
  return l;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidConfig(what);
}

// Applies `fn` to every (key, field) pair so reading and writing stay in step.
template <typename Config, typename Fn>
void for_each_field(Config& c, Fn&& fn) {
  fn("percentile", c.percentile);
  fn("convergence_threshold", c.convergence_threshold);
  fn("consecutive_days", c.consecutive_days);
  fn("window_seconds", c.window_seconds);
  fn("gap_zero_seconds", c.gap_zero_seconds);
  fn("gap_one_seconds", c.gap_one_seconds);
  fn("kde_bins", c.kde_bins);
  fn("levenshtein_top_k", c.levenshtein_top_k);
  fn("min_events_per_day", c.min_events_per_day);
  fn("continuous_scale", c.continuous_scale);
  fn("threshold_window_days", c.threshold_window_days);
  fn("drift_breach_distance", c.drift_breach_distance);
  fn("drift_breach_days", c.drift_breach_days);
  fn("drift_baseline_days", c.drift_baseline_days);
  fn("retrain_window_seconds", c.retrain_window_seconds);
  fn("utc_offset_seconds", c.utc_offset_seconds);
  fn("seed", c.seed);
  fn("threads", c.threads);
}

int parse_hour(const json& j) {
  if (j.is_string() && j.get<std::string>() == "*") return kAnyHour;
  if (!j.is_number_integer()) throw InvalidSpec("hour must be an integer or \"*\"");
  return j.get<int>();
}

json hour_json(int hour) { return hour == kAnyHour ? json("*") : json(hour); }

}  // namespace

void validate(const RunConfig& c) {
  require(c.percentile > 0.0 && c.percentile < 100.0, "percentile must lie in (0, 100)");
  require(c.convergence_threshold > 0.0 && c.convergence_threshold <= 1.0,
          "convergence_threshold must lie in (0, 1]");
  require(c.consecutive_days >= 1, "consecutive_days must be at least 1");
  require(c.window_seconds >= 1 && c.window_seconds <= kSecondsPerDay &&
              kSecondsPerDay % c.window_seconds == 0,
          "window_seconds must divide a day");
  require(c.gap_zero_seconds >= 0 && c.gap_one_seconds > c.gap_zero_seconds,
          "need 0 <= gap_zero_seconds < gap_one_seconds");
  require(c.kde_bins >= 8 && c.kde_bins <= (1 << 16), "kde_bins must lie in [8, 65536]");
  require(c.levenshtein_top_k >= 1, "levenshtein_top_k must be positive");
  require(c.min_events_per_day >= 0, "min_events_per_day must be non-negative");
  require(c.continuous_scale > 0.0, "continuous_scale must be positive");
  require(c.threshold_window_days >= 1, "threshold_window_days must be positive");
  require(c.drift_breach_distance > 0.0, "drift_breach_distance must be positive");
  require(c.drift_breach_days >= 1, "drift_breach_days must be positive");
  require(c.drift_baseline_days >= 1, "drift_baseline_days must be positive");
  require(c.retrain_window_seconds >= 60, "retrain_window_seconds must be at least 60");
  require(std::abs(c.utc_offset_seconds) <= 14 * kSecondsPerHour, "utc_offset_seconds out of range");
  require(c.threads >= 0, "threads must be non-negative");
}

json to_json(const RunConfig& config) {
  json j = json::object();
  RunConfig copy = config;
  for_each_field(copy, [&](const char* key, auto& field) { j[key] = field; });
  return j;
}

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidConfig("config must be a JSON object");
  RunConfig c;
  std::size_t known = 0;
  for_each_field(c, [&](const char* key, auto& field) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    ++known;
    using T = std::remove_reference_t<decltype(field)>;
    if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw InvalidConfig(std::string(key) + " must be a number");
    } else {
      if (!it->is_number_integer()) throw InvalidConfig(std::string(key) + " must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && !it->is_number_unsigned()) {
          throw InvalidConfig(std::string(key) + " must be non-negative");
        }
      }
    }
    field = it->get<T>();
  });
  if (known != doc.size()) {
    for (const auto& [key, _] : doc.items()) {
      if (!to_json(RunConfig{}).contains(key)) throw InvalidConfig("unknown config key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

std::string save_run_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig load_run_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  return run_config_from_json(doc);
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidConfig("override must look like key=value: '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json doc = to_json(config);
  if (!doc.contains(key)) throw InvalidConfig("unknown config key '" + key + "'");
  doc[key] = value;
  config = run_config_from_json(doc);
}

json to_json(const PersonaSpec& spec) {
  json j;
  j["user_id"] = spec.user_id;
  j["seed"] = spec.seed;
  j["start_ts"] = spec.start_ts;
  j["duration_days"] = spec.duration_days;
  j["event_rate"] = spec.event_rate;
  j["utc_offset_seconds"] = spec.utc_offset_seconds;
  j["emit_cell"] = spec.emit_cell;
  j["locations"] = json::array();
  for (const auto& loc : spec.locations) {
    j["locations"].push_back({{"label", loc.label}, {"dwell", loc.dwell}});
  }
  j["weekend_locations"] = json::array();
  for (const auto& loc : spec.weekend_locations) {
    j["weekend_locations"].push_back({{"label", loc.label}, {"dwell", loc.dwell}});
  }
  j["app_habits"] = json::array();
  for (const auto& [key, dist] : spec.app_habits) {
    j["app_habits"].push_back({{"hour", hour_json(key.first)}, {"location", key.second}, {"labels", dist}});
  }
  j["continuous_baselines"] = json::array();
  for (const auto& [key, b] : spec.continuous_baselines) {
    j["continuous_baselines"].push_back({{"sensor", std::string(to_string(key.first))},
                                         {"hour", hour_json(key.second)},
                                         {"mean", b.mean},
                                         {"stddev", b.stddev}});
  }
  return j;
}

PersonaSpec persona_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw InvalidSpec("persona must be a JSON object");
    PersonaSpec p;
    p.user_id = doc.value("user_id", p.user_id);
    p.seed = doc.value("seed", p.seed);
    p.start_ts = doc.value("start_ts", p.start_ts);
    p.duration_days = doc.value("duration_days", p.duration_days);
    p.event_rate = doc.value("event_rate", p.event_rate);
    p.utc_offset_seconds = doc.value("utc_offset_seconds", p.utc_offset_seconds);
    p.emit_cell = doc.value("emit_cell", p.emit_cell);
    auto routine = [](const json& list) {
      std::vector<LocationDwell> out;
      for (const auto& loc : list) {
        LocationDwell d;
        d.label = loc.at("label").get<std::string>();
        const auto& dwell = loc.at("dwell");
        if (!dwell.is_array() || dwell.size() != 24) throw InvalidSpec("dwell needs 24 hourly values");
        for (std::size_t h = 0; h < 24; ++h) d.dwell[h] = dwell[h].get<double>();
        out.push_back(std::move(d));
      }
      return out;
    };
    p.locations = routine(doc.at("locations"));
    if (doc.contains("weekend_locations")) p.weekend_locations = routine(doc.at("weekend_locations"));
    if (doc.contains("app_habits")) {
      for (const auto& habit : doc.at("app_habits")) {
        const int hour = parse_hour(habit.at("hour"));
        const auto location = habit.value("location", std::string(kAnyLocation));
        p.app_habits[{hour, location}] = habit.at("labels").get<LabelDistribution>();
      }
    }
    if (doc.contains("continuous_baselines")) {
      for (const auto& b : doc.at("continuous_baselines")) {
        const auto name = b.at("sensor").get<std::string>();
        const auto sensor = parse_sensor_kind(name);
        if (!sensor) throw InvalidSpec("unknown sensor '" + name + "'");
        const int hour = parse_hour(b.at("hour"));
        p.continuous_baselines[{*sensor, hour}] = {b.at("mean").get<double>(), b.at("stddev").get<double>()};
      }
    }
    validate(p);
    return p;
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("malformed persona: ") + e.what());
  } catch (const InvalidSpec&) {
    throw;
  } catch (const Error& e) {
    throw InvalidSpec(e.what());
  }
}

std::string_view to_string(DriftStrategy strategy) {
  switch (strategy) {
    case DriftStrategy::none: return "none";
    case DriftStrategy::update: return "update";
    case DriftStrategy::fresh: return "fresh";
  }
  return "none";
}

DriftStrategy parse_drift_strategy(std::string_view name) {
  if (name == "none") return DriftStrategy::none;
  if (name == "update") return DriftStrategy::update;
  if (name == "fresh") return DriftStrategy::fresh;
  throw InvalidScenario("unknown drift strategy '" + std::string(name) + "'");
}

Scenario default_scenario() {
  Scenario s;
  s.persona = default_persona();
  const int day = 30;  // a Monday
  s.attacks = {
      {AttackKind::uninformed_outsider, day, 14, 10 * kSecondsPerHour},
      {AttackKind::informed_outsider, day, 15, 9 * kSecondsPerHour},
      {AttackKind::uninformed_insider, day, 13, 4 * kSecondsPerHour},
      {AttackKind::informed_insider, day, 13, 4 * kSecondsPerHour},
  };
  s.drift = DriftCase{};
  return s;
}

json to_json(const Scenario& scenario) {
  json j;
  j["name"] = scenario.name;
  j["persona"] = to_json(scenario.persona);
  j["attack_options"] = {{"baseline_shift_sd", scenario.attack_options.baseline_shift_sd}};
  j["attacks"] = json::array();
  for (const auto& a : scenario.attacks) {
    j["attacks"].push_back({{"kind", std::string(to_string(a.kind))},
                            {"day", a.day},
                            {"start_hour", a.start_hour},
                            {"duration_seconds", a.duration_seconds}});
  }
  if (scenario.drift) {
    json strategies = json::array();
    for (auto st : scenario.drift->strategies) strategies.push_back(std::string(to_string(st)));
    j["drift"] = {{"move_day", scenario.drift->move_day},
                  {"days_after", scenario.drift->days_after},
                  {"strategies", strategies}};
  }
  return j;
}

Scenario scenario_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw InvalidScenario("scenario must be a JSON object");
    Scenario s;
    s.name = doc.value("name", s.name);
    s.persona = doc.contains("persona") ? persona_from_json(doc.at("persona")) : default_persona();
    if (doc.contains("attack_options")) {
      s.attack_options.baseline_shift_sd =
          doc.at("attack_options").value("baseline_shift_sd", s.attack_options.baseline_shift_sd);
    }
    if (doc.contains("attacks")) {
      for (const auto& a : doc.at("attacks")) {
        AttackCase c;
        c.kind = parse_attack_kind(a.at("kind").get<std::string>());
        c.day = a.value("day", c.day);
        c.start_hour = a.value("start_hour", c.start_hour);
        c.duration_seconds = a.value("duration_seconds", c.duration_seconds);
        if (c.day < 0 || c.day >= s.persona.duration_days) {
          throw InvalidScenario("attack day outside the persona's span");
        }
        if (c.start_hour < 0 || c.start_hour > 23 || c.duration_seconds <= 0) {
          throw InvalidScenario("attack needs start_hour in [0, 23] and a positive duration");
        }
        s.attacks.push_back(c);
      }
    }
    if (doc.contains("drift") && !doc.at("drift").is_null()) {
      const auto& d = doc.at("drift");
      DriftCase c;
      c.move_day = d.value("move_day", c.move_day);
      c.days_after = d.value("days_after", c.days_after);
      if (d.contains("strategies")) {
        c.strategies.clear();
        for (const auto& name : d.at("strategies")) {
          c.strategies.push_back(parse_drift_strategy(name.get<std::string>()));
        }
      }
      if (c.move_day < 1 || c.days_after < 1) throw InvalidScenario("drift needs move_day and days_after >= 1");
      s.drift = c;
    }
    return s;
  } catch (const json::exception& e) {
    throw InvalidScenario(std::string("malformed scenario: ") + e.what());
  } catch (const InvalidScenario&) {
    throw;
  } catch (const Error& e) {
    throw InvalidScenario(e.what());
  }
}

}  // namespace implauth
