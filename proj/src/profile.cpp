#include "implauth/profile.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "implauth/errors.hpp"

namespace implauth {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::temporal ? "temporal" : "spatial";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::training:
      return "training";
    case Phase::deployed:
      return "deployed";
    case Phase::retraining:
      return "retraining";
  }
  return "training";
}

Phase parse_phase(std::string_view name) {
  if (name == "training") return Phase::training;
  if (name == "deployed") return Phase::deployed;
  if (name == "retraining") return Phase::retraining;
  throw CorruptDocument("unknown phase '" + std::string(name) + "'");
}

std::string Anchor::label() const {
  if (kind == ModelKind::spatial) return location;
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", hour);
  return buf;
}

// --- AnchorModel -----------------------------------------------------------

void AnchorModel::observe(SensorKind sensor, const SensorValue& value, const DensityConfig& config) {
  auto it = densities_.find(sensor);
  if (is_discrete(sensor)) {
    const auto* label = std::get_if<std::string>(&value);
    if (label == nullptr) throw InvalidSpec("discrete sensor carries a scalar value");
    if (it == densities_.end()) it = densities_.emplace(sensor, DiscreteDensity{}).first;
    std::get<DiscreteDensity>(it->second).observe(*label);
  } else {
    const auto* x = std::get_if<double>(&value);
    if (x == nullptr) throw InvalidSpec("continuous sensor carries a label");
    if (!std::isfinite(*x)) throw NonFiniteInput("continuous observation must be finite");
    if (it == densities_.end()) it = densities_.emplace(sensor, ContinuousDensity{config}).first;
    std::get<ContinuousDensity>(it->second).observe(*x);
  }
}

const SensorDensity* AnchorModel::find(SensorKind sensor) const {
  auto it = densities_.find(sensor);
  return it == densities_.end() ? nullptr : &it->second;
}

// --- Profile ---------------------------------------------------------------

Profile::Profile(std::string user_id, ProfileConfig config)
    : user_id_(std::move(user_id)), config_(config) {
  if (config_.utc_offset_seconds % 60 != 0) throw InvalidConfig("utc offset must be whole minutes");
}

void Profile::ingest(const SensorEvent& event) {
  const Timestamp floor = std::max(last_event_ts_.value_or(event.timestamp),
                                   watermark_.value_or(event.timestamp));
  if (event.timestamp < floor) {
    throw OutOfOrderEvent("event at " + std::to_string(event.timestamp) + " precedes " +
                          std::to_string(floor));
  }
  const std::int64_t offset = config_.utc_offset_seconds;
  const int hour = local_hour(event.timestamp, offset);
  const std::string& location =
      event.location_id.empty() ? std::string(kUnknownLocation) : event.location_id;

  if (is_discrete(event.sensor) != std::holds_alternative<std::string>(event.value)) {
    throw InvalidSpec("value variant does not match sensor " + std::string(to_string(event.sensor)));
  }
  if (const auto* x = std::get_if<double>(&event.value); x && !std::isfinite(*x)) {
    throw NonFiniteInput("continuous observation must be finite");
  }
  temporal_[static_cast<std::size_t>(hour)].observe(event.sensor, event.value, config_.density);
  auto it = spatial_.find(location);
  if (it == spatial_.end()) it = spatial_.emplace(location, AnchorModel{}).first;
  it->second.observe(event.sensor, event.value, config_.density);

  const std::int64_t day = local_day(event.timestamp, offset);
  if (last_event_day_ != day) ++days_observed_;
  last_event_day_ = day;
  last_event_ts_ = event.timestamp;
  watermark_ = std::max(watermark_.value_or(event.timestamp), event.timestamp);
}

void Profile::advance_clock(Timestamp now) {
  watermark_ = std::max(watermark_.value_or(now), now);
}

const AnchorModel* Profile::spatial(std::string_view location) const {
  auto it = spatial_.find(location);
  return it == spatial_.end() ? nullptr : &it->second;
}

const AnchorModel* Profile::find(const Anchor& anchor) const {
  if (anchor.kind == ModelKind::temporal) {
    if (anchor.hour < 0 || anchor.hour > 23) return nullptr;
    return &temporal_[static_cast<std::size_t>(anchor.hour)];
  }
  return spatial(anchor.location);
}

ProfileSnapshot snapshot_now(const Profile& profile, std::int64_t day_index) {
  return {day_index, std::make_shared<const Profile>(profile)};
}

ProfileSnapshot snapshot_day(const Profile& profile, std::int64_t day_index) {
  const std::int64_t offset = profile.config().utc_offset_seconds;
  const auto mark = profile.watermark();
  if (!mark || local_day(*mark, offset) <= day_index) {
    throw DayNotComplete("day " + std::to_string(day_index) + " has not ended");
  }
  if (auto last = profile.last_event_day(); last && *last > day_index) {
    throw Error("profile already holds events after day " + std::to_string(day_index));
  }
  return snapshot_now(profile, day_index);
}

// --- Serialization ---------------------------------------------------------

namespace {

json opt_to_json(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::int64_t> opt_from_json(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<std::int64_t>();
}

json density_config_to_json(const DensityConfig& c) {
  json j;
  j["bins"] = c.bins;
  j["fixed_bandwidth"] = c.fixed_bandwidth ? json(*c.fixed_bandwidth) : json(nullptr);
  j["bandwidth_floor_fraction"] = c.bandwidth_floor_fraction;
  j["kernel_support"] = c.kernel_support;
  j["initial_half_span"] = c.initial_half_span;
  return j;
}

DensityConfig density_config_from_json(const json& j) {
  DensityConfig c;
  c.bins = j.at("bins").get<int>();
  if (!j.at("fixed_bandwidth").is_null()) c.fixed_bandwidth = j.at("fixed_bandwidth").get<double>();
  c.bandwidth_floor_fraction = j.at("bandwidth_floor_fraction").get<double>();
  c.kernel_support = j.at("kernel_support").get<double>();
  c.initial_half_span = j.at("initial_half_span").get<double>();
  if (c.bins < 2) throw CorruptDocument("bins must be at least 2");
  return c;
}

json deciles_to_json(const Deciles& d) { return json(std::vector<double>(d.begin(), d.end())); }

Deciles deciles_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 9) throw CorruptDocument("decile vector must have 9 entries");
  Deciles d{};
  std::copy(v.begin(), v.end(), d.begin());
  return d;
}

json lifecycle_to_json(const LifecycleRecord& r) {
  json j;
  j["phase"] = std::string(to_string(r.state.phase));
  j["retrain_deadline"] = opt_to_json(r.state.retrain_deadline);
  j["deployed_since"] = opt_to_json(r.state.deployed_since);
  j["last_closed_day"] = opt_to_json(r.last_closed_day);
  json t;
  t["percentile"] = r.threshold.percentile;
  t["window_days"] = r.threshold.window_days;
  t["current"] = r.threshold.current;
  t["daily"] = json::array();
  for (const auto& [day, value] : r.threshold.daily) t["daily"].push_back(json::array({day, value}));
  j["threshold"] = t;
  json d;
  d["baseline"] = r.drift.baseline ? deciles_to_json(*r.drift.baseline) : json(nullptr);
  d["baseline_days"] = json::array();
  for (const auto& v : r.drift.baseline_days) d["baseline_days"].push_back(deciles_to_json(v));
  d["consecutive_breaches"] = r.drift.consecutive_breaches;
  d["breach_distance"] = r.drift.breach_distance;
  d["breach_days"] = r.drift.breach_days;
  d["baseline_days_required"] = r.drift.baseline_days_required;
  d["last_distance"] = r.drift.last_distance;
  j["drift"] = d;
  return j;
}

LifecycleRecord lifecycle_from_json(const json& j) {
  LifecycleRecord r;
  r.state.phase = parse_phase(j.at("phase").get<std::string>());
  r.state.retrain_deadline = opt_from_json(j.at("retrain_deadline"));
  r.state.deployed_since = opt_from_json(j.at("deployed_since"));
  r.last_closed_day = opt_from_json(j.at("last_closed_day"));
  if (r.state.retrain_deadline.has_value() != (r.state.phase == Phase::retraining)) {
    throw CorruptDocument("retrain_deadline must be set exactly when retraining");
  }
  const json& t = j.at("threshold");
  r.threshold.percentile = t.at("percentile").get<double>();
  r.threshold.window_days = t.at("window_days").get<int>();
  r.threshold.current = t.at("current").get<double>();
  for (const auto& entry : t.at("daily")) {
    r.threshold.daily.emplace_back(entry.at(0).get<std::int64_t>(), entry.at(1).get<double>());
  }
  const json& d = j.at("drift");
  if (!d.at("baseline").is_null()) r.drift.baseline = deciles_from_json(d.at("baseline"));
  for (const auto& v : d.at("baseline_days")) r.drift.baseline_days.push_back(deciles_from_json(v));
  r.drift.consecutive_breaches = d.at("consecutive_breaches").get<int>();
  r.drift.breach_distance = d.at("breach_distance").get<double>();
  r.drift.breach_days = d.at("breach_days").get<int>();
  r.drift.baseline_days_required = d.at("baseline_days_required").get<int>();
  r.drift.last_distance = d.at("last_distance").get<double>();
  return r;
}

json anchor_to_json(const AnchorModel& model) {
  json j = json::object();
  for (const auto& [sensor, density] : model.densities()) {
    json s;
    if (const auto* dd = std::get_if<DiscreteDensity>(&density)) {
      s["kind"] = "discrete";
      json counts = json::object();
      for (const auto& [label, c] : dd->counts()) counts[label] = c;
      s["counts"] = counts;
    } else {
      const auto stored = std::get<ContinuousDensity>(density).store();
      s["kind"] = "continuous";
      s["grid_min"] = stored.grid_min;
      s["grid_max"] = stored.grid_max;
      s["mass"] = stored.mass;
      s["n"] = stored.n;
      s["mean"] = stored.mean;
      s["m2"] = stored.m2;
      s["bandwidth"] = stored.bandwidth;
    }
    j[std::string(to_string(sensor))] = s;
  }
  return j;
}

AnchorModel anchor_from_json(const json& j, const DensityConfig& config) {
  AnchorModel model;
  for (const auto& [name, s] : j.items()) {
    auto sensor = parse_sensor_kind(name);
    if (!sensor) throw CorruptDocument("unknown sensor '" + name + "'");
    const auto kind = s.at("kind").get<std::string>();
    if (kind == "discrete") {
      if (!is_discrete(*sensor)) throw CorruptDocument("sensor " + name + " is not discrete");
      DiscreteDensity::Counts counts;
      for (const auto& [label, c] : s.at("counts").items()) counts[label] = c.get<std::uint64_t>();
      model.densities().emplace(*sensor, DiscreteDensity::from_counts(std::move(counts)));
    } else if (kind == "continuous") {
      if (is_discrete(*sensor)) throw CorruptDocument("sensor " + name + " is not continuous");
      ContinuousDensity::Stored stored;
      stored.config = config;
      stored.grid_min = s.at("grid_min").get<double>();
      stored.grid_max = s.at("grid_max").get<double>();
      stored.mass = s.at("mass").get<std::vector<double>>();
      stored.n = s.at("n").get<std::uint64_t>();
      stored.mean = s.at("mean").get<double>();
      stored.m2 = s.at("m2").get<double>();
      stored.bandwidth = s.at("bandwidth").get<double>();
      model.densities().emplace(*sensor, ContinuousDensity::restore(std::move(stored)));
    } else {
      throw CorruptDocument("unknown density kind '" + kind + "'");
    }
  }
  return model;
}

}  // namespace

std::string save_profile(const Profile& p) {
  json doc;
  doc["format_version"] = kProfileFormatVersion;
  doc["user_id"] = p.user_id();
  doc["days_observed"] = p.days_observed();
  doc["last_event_ts"] = opt_to_json(p.last_event_ts());
  doc["last_event_day"] = opt_to_json(p.last_event_day());
  doc["watermark"] = opt_to_json(p.watermark());
  json config;
  config["utc_offset_seconds"] = p.config().utc_offset_seconds;
  config["density"] = density_config_to_json(p.config().density);
  doc["config"] = config;
  json temporal = json::object();
  for (int h = 0; h < 24; ++h) {
    const auto& model = p.temporal(h);
    if (!model.empty()) temporal[Anchor::time(h).label()] = anchor_to_json(model);
  }
  doc["temporal"] = temporal;
  json spatial = json::object();
  for (const auto& [label, model] : p.spatial_models()) spatial[label] = anchor_to_json(model);
  doc["spatial"] = spatial;
  doc["lifecycle"] = lifecycle_to_json(p.lifecycle());
  return doc.dump(1) + "\n";
}

Profile load_profile(std::string_view document) {
  json doc = json::parse(document.begin(), document.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw CorruptDocument("profile is not valid JSON");
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kProfileFormatVersion) {
      throw VersionMismatch("profile format " + std::to_string(version) + ", expected " +
                            std::to_string(kProfileFormatVersion));
    }
    ProfileConfig config;
    config.utc_offset_seconds = doc.at("config").at("utc_offset_seconds").get<std::int64_t>();
    config.density = density_config_from_json(doc.at("config").at("density"));
    Profile p(doc.at("user_id").get<std::string>(), config);
    p.days_observed_ = doc.at("days_observed").get<int>();
    p.last_event_ts_ = opt_from_json(doc.at("last_event_ts"));
    p.last_event_day_ = opt_from_json(doc.at("last_event_day"));
    p.watermark_ = opt_from_json(doc.at("watermark"));
    for (const auto& [key, value] : doc.at("temporal").items()) {
      int hour = -1;
      if (key.size() != 2 || std::sscanf(key.c_str(), "%d", &hour) != 1 || hour < 0 || hour > 23) {
        throw CorruptDocument("bad temporal anchor '" + key + "'");
      }
      p.temporal_[static_cast<std::size_t>(hour)] = anchor_from_json(value, config.density);
    }
    for (const auto& [key, value] : doc.at("spatial").items()) {
      p.spatial_.emplace(key, anchor_from_json(value, config.density));
    }
    p.lifecycle_ = lifecycle_from_json(doc.at("lifecycle"));
    return p;
  } catch (const json::exception& e) {
    throw CorruptDocument(std::string("malformed profile: ") + e.what());
  }
}

}  // namespace implauth
