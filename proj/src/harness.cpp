#include "implauth/harness.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <ostream>

#include <omp.h>

#include "implauth/errors.hpp"

namespace implauth {

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

DailySummary summarize_day(std::int64_t day, Phase phase, std::size_t events,
                           std::span<const ComfortSample> samples,
                           std::span<const DecisionRecord> decisions, double percentile) {
  DailySummary s;
  s.day = day;
  s.phase = phase;
  s.events = events;
  s.windows = samples.size();
  s.challenges = static_cast<std::size_t>(std::count_if(
      decisions.begin(), decisions.end(), [](const auto& d) { return d.decision == Decision::challenge; }));
  if (samples.empty()) return s;
  double sum = 0.0;
  for (const auto& x : samples) sum += x.aggregate;
  s.mean = sum / static_cast<double>(samples.size());
  s.p2 = daily_percentile(samples, percentile);
  s.deciles = comfort_deciles(samples);
  return s;
}

// Retraining deadlines that fall at or before `now`: either the user
// re-authenticates (the window restarts at the deadline) or training stops.
// Returns false once the profile is no longer learning.
bool settle_deadline(ReplayResult& r, Timestamp now, std::int64_t day, bool reauthenticate,
                     const LifecycleConfig& lcfg) {
  auto& rec = r.lifecycle;
  while (rec.state.phase == Phase::retraining && rec.state.retrain_deadline &&
         *rec.state.retrain_deadline <= now) {
    if (reauthenticate) {
      r.events.push_back(extend_retrain(rec, true, *rec.state.retrain_deadline, lcfg));
      r.events.back().day = day;
    } else {
      r.events.push_back(*expire_retrain(rec, *rec.state.retrain_deadline, day));
      r.deployed = std::make_shared<const Profile>(r.profile);
    }
  }
  return rec.state.phase != Phase::deployed;
}

}  // namespace

std::string_view version() { return "implauth 0.1.0"; }

ReplayResult replay(std::span<const SensorEvent> events, const RunConfig& config,
                    const ReplayOptions& options) {
  validate(config);
  const auto off = config.utc_offset_seconds;
  const auto ccfg = config.comfort_config();
  const auto scfg = config.stability_config();
  const auto lcfg = config.lifecycle_config();

  ReplayResult r{Profile(events.empty() ? std::string("owner") : events.front().user_id,
                         config.profile_config()),
                 nullptr, make_lifecycle_record(lcfg), {}, {}, {}, {}, {}, std::nullopt};
  if (events.empty()) {
    r.profile.set_lifecycle(r.lifecycle);
    return r;
  }
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].timestamp < events[i - 1].timestamp) {
      throw OutOfOrderEvent("replay needs a stream sorted by timestamp");
    }
  }

  auto& rec = r.lifecycle;
  const auto empty = std::make_shared<const Profile>(r.profile);
  std::optional<ProfileSnapshot> prev;  // learning profile at the end of the previous day
  std::vector<DayDistance> recent;      // distances since training last (re)started
  std::optional<Timestamp> carried;
  const std::int64_t first_day = local_day(events.front().timestamp, off);
  const std::int64_t last_day = local_day(events.back().timestamp, off);
  std::size_t lo = 0;

  for (std::int64_t d = first_day; d <= last_day; ++d) {
    const Timestamp ds = day_start(d, off);
    const Timestamp de = ds + kSecondsPerDay;
    std::size_t hi = lo;
    while (hi < events.size() && events[hi].timestamp < de) ++hi;
    const auto today = events.subspan(lo, hi - lo);

    if (auto it = options.retrain_at_day.find(d); it != options.retrain_at_day.end()) {
      r.events.push_back(begin_retrain(rec, it->second, true, ds, r.profile, lcfg));
      recent.clear();
      prev = ProfileSnapshot{d - 1, std::make_shared<const Profile>(r.profile)};
    }

    const Phase phase = rec.state.phase;
    const Profile& scorer = phase == Phase::deployed ? *r.deployed : (prev ? **prev : *empty);
    const Timestamp first = d == first_day ? window_floor(events.front().timestamp, ccfg.window_seconds) : ds;
    const Timestamp end =
        d == last_day ? window_floor(events.back().timestamp, ccfg.window_seconds) + ccfg.window_seconds : de;
    const auto windows = plan_windows(today, first, end, ccfg.window_seconds, carried);
    auto samples = score_windows(scorer, today, windows, ccfg, options.policy, config.threads);

    const std::size_t decisions_before = r.decisions.size();
    if (phase != Phase::training && rec.threshold.has_history()) {
      for (const auto& s : samples) r.decisions.push_back(decide(s, rec.threshold, phase));
    }

    bool learning = phase != Phase::deployed;
    if (learning) {
      for (const auto& e : today) {
        if (!(learning = settle_deadline(r, e.timestamp, d, options.reauthenticate, lcfg))) break;
        r.profile.ingest(e);
      }
      if (learning) learning = settle_deadline(r, de, d, options.reauthenticate, lcfg);
    }
    if (learning) {
      r.profile.advance_clock(de);
      auto snap = snapshot_day(r.profile, d);
      if (prev && prev->day_index == d - 1 && today.size() >= scfg.min_events_per_day) {
        r.distances.push_back(day_distance(*prev, snap, scfg));
        recent.push_back(r.distances.back());
      }
      prev = std::move(snap);
    }

    const Phase before = rec.state.phase;
    for (auto& e : end_of_day(rec, d, recent, samples, de, lcfg)) r.events.push_back(std::move(e));
    if (before != Phase::deployed && rec.state.phase == Phase::deployed) r.deployed = prev->profile;
    if (rec.state.phase == Phase::deployed && !r.converged_day) r.converged_day = d;

    r.days.push_back(summarize_day(d, phase, today.size(), samples,
                                   std::span(r.decisions).subspan(decisions_before), config.percentile));
    if (options.keep_samples) {
      r.samples.insert(r.samples.end(), std::make_move_iterator(samples.begin()),
                       std::make_move_iterator(samples.end()));
    }
    if (!today.empty()) carried = today.back().timestamp;
    lo = hi;
  }
  r.profile.set_lifecycle(rec);
  return r;
}

std::vector<DecisionRecord> score_stream(const Profile& profile, double threshold,
                                         std::span<const SensorEvent> events, const RunConfig& config,
                                         std::vector<ComfortSample>* samples) {
  std::vector<DecisionRecord> out;
  if (events.empty()) return out;
  const auto ccfg = config.comfort_config();
  const auto windows =
      plan_windows(events, events.front().timestamp,
                   window_floor(events.back().timestamp, ccfg.window_seconds) + ccfg.window_seconds,
                   ccfg.window_seconds);
  auto scored = score_windows(profile, events, windows, ccfg, ExecPolicy::parallel, config.threads);
  ThresholdState t;
  t.daily = {{0, threshold}};
  t.current = threshold;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(decide(s, t, profile.lifecycle().state.phase));
  if (samples) *samples = std::move(scored);
  return out;
}

ScenarioResult evaluate_span(const ReplayResult& trained, std::span<const SensorEvent> stream,
                             Timestamp start, std::int64_t duration, const RunConfig& config,
                             std::string name) {
  if (trained.lifecycle.state.phase != Phase::deployed || !trained.deployed ||
      !trained.lifecycle.threshold.has_history()) {
    throw NotDeployedBeforeAttack("profile is not deployed before " + name);
  }
  const auto ccfg = config.comfort_config();
  const auto windows = plan_windows(stream, start, start + duration, ccfg.window_seconds);
  const auto samples =
      score_windows(*trained.deployed, stream, windows, ccfg, ExecPolicy::parallel, config.threads);

  ScenarioResult res;
  res.name = std::move(name);
  res.windows = samples.size();
  double sum = 0.0;
  for (const auto& s : samples) {
    res.decisions.push_back(decide(s, trained.lifecycle.threshold, Phase::deployed));
    sum += s.aggregate;
    if (res.decisions.back().decision == Decision::challenge) {
      ++res.challenges;
      if (!res.time_to_detect) res.time_to_detect = s.window_start + ccfg.window_seconds - start;
    }
  }
  if (!samples.empty()) {
    res.mean_comfort = sum / static_cast<double>(samples.size());
    res.detection_rate = static_cast<double>(res.challenges) / static_cast<double>(samples.size());
  }

  std::size_t lo = 0;
  while (lo < samples.size()) {
    const auto day = local_day(samples[lo].window_start, ccfg.utc_offset_seconds);
    std::size_t hi = lo;
    while (hi < samples.size() && local_day(samples[hi].window_start, ccfg.utc_offset_seconds) == day) ++hi;
    std::size_t events = 0;
    for (const auto& e : stream) {
      if (e.timestamp >= start && e.timestamp < start + duration &&
          local_day(e.timestamp, ccfg.utc_offset_seconds) == day) {
        ++events;
      }
    }
    res.days.push_back(summarize_day(day, Phase::deployed, events,
                                     std::span(samples).subspan(lo, hi - lo),
                                     std::span(res.decisions).subspan(lo, hi - lo), config.percentile));
    lo = hi;
  }
  return res;
}

namespace {

std::vector<SensorEvent> events_between(std::span<const SensorEvent> events, Timestamp from, Timestamp to) {
  std::vector<SensorEvent> out;
  for (const auto& e : events) {
    if (e.timestamp >= from && e.timestamp < to) out.push_back(e);
  }
  return out;
}

std::vector<SensorEvent> splice_attack(const PersonaSpec& owner, std::span<const SensorEvent> owner_stream,
                                       AttackKind kind, Timestamp start, std::int64_t duration,
                                       std::int64_t utc_offset, const AttackOptions& options) {
  const Timestamp ds = day_start(local_day(start, utc_offset), utc_offset);
  auto stream = events_between(owner_stream, ds, start);
  for (auto& e : generate_attack(owner, kind, start, duration, options)) {
    if (e.timestamp >= start && e.timestamp < start + duration) stream.push_back(std::move(e));
  }
  return stream;
}

ReplayResult train_before(std::span<const SensorEvent> owner_stream, Timestamp start,
                          const RunConfig& config) {
  const Timestamp ds = day_start(local_day(start, config.utc_offset_seconds), config.utc_offset_seconds);
  const auto cut = std::lower_bound(owner_stream.begin(), owner_stream.end(), ds,
                                    [](const SensorEvent& e, Timestamp t) { return e.timestamp < t; });
  ReplayOptions opts;
  opts.keep_samples = false;
  return replay(owner_stream.subspan(0, static_cast<std::size_t>(cut - owner_stream.begin())), config, opts);
}

}  // namespace

ScenarioResult run_attack(const PersonaSpec& owner, std::span<const SensorEvent> owner_stream,
                          AttackKind kind, Timestamp start, std::int64_t duration,
                          const RunConfig& config, const AttackOptions& options) {
  const auto trained = train_before(owner_stream, start, config);
  const auto stream =
      splice_attack(owner, owner_stream, kind, start, duration, config.utc_offset_seconds, options);
  return evaluate_span(trained, stream, start, duration, config, std::string(to_string(kind)));
}

DriftCaseResult run_drift_case(const PersonaSpec& owner, int move_day, int days_after,
                               DriftStrategy strategy, const RunConfig& config) {
  if (move_day < 1 || days_after < 1) throw InvalidScenario("drift needs move_day and days_after >= 1");
  const Timestamp move_ts = owner.start_ts + static_cast<std::int64_t>(move_day) * kSecondsPerDay;
  auto stream = generate_between(owner, owner.start_ts, move_ts, owner.seed);
  const auto moved = moved_persona(owner);
  auto after = generate_between(moved, move_ts, move_ts + static_cast<std::int64_t>(days_after) * kSecondsPerDay,
                                moved.seed);
  stream.insert(stream.end(), std::make_move_iterator(after.begin()), std::make_move_iterator(after.end()));

  const std::int64_t move_index = local_day(move_ts, config.utc_offset_seconds);
  ReplayOptions opts;
  opts.keep_samples = false;
  if (strategy == DriftStrategy::update) opts.retrain_at_day[move_index] = RetrainMode::update;
  if (strategy == DriftStrategy::fresh) opts.retrain_at_day[move_index] = RetrainMode::fresh;
  auto r = replay(stream, config, opts);
  if (!r.converged_day || *r.converged_day >= move_index) {
    throw InvalidScenario("profile was not deployed before the move");
  }

  DriftCaseResult out;
  out.strategy = strategy;
  out.move_day = move_index;
  double sum = 0.0;
  int n = 0;
  for (const auto& d : r.days) {
    if (d.day < move_index && d.day > *r.converged_day) {
      sum += d.mean;
      ++n;
    }
  }
  out.pre_move_mean = n > 0 ? sum / n : 0.0;
  out.days = std::move(r.days);
  out.events = std::move(r.events);
  return out;
}

SimulationResult simulate(const Scenario& scenario, const RunConfig& base) {
  RunConfig config = base;
  config.utc_offset_seconds = scenario.persona.utc_offset_seconds;
  validate(config);
  PersonaSpec persona = scenario.persona;
  persona.seed = config.seed;
  validate(persona);
  const auto owner_stream = generate_persona(persona);

  SimulationResult result;
  result.owner = replay(owner_stream, config);

  auto attack_start = [&](const AttackCase& a) {
    return day_start(local_day(persona.start_ts, config.utc_offset_seconds) + a.day,
                     config.utc_offset_seconds) +
           static_cast<std::int64_t>(a.start_hour) * kSecondsPerHour;
  };
  std::map<int, ReplayResult> trained;
  for (const auto& a : scenario.attacks) {
    if (!trained.contains(a.day)) trained.emplace(a.day, train_before(owner_stream, attack_start(a), config));
  }
  const int control_day = scenario.attacks.empty() ? persona.duration_days - 1 : scenario.attacks.front().day;
  if (!trained.contains(control_day)) {
    trained.emplace(control_day, train_before(owner_stream, attack_start({AttackKind{}, control_day, 0, 0}), config));
  }

  const std::size_t n_attacks = scenario.attacks.size();
  const std::size_t n_drift = scenario.drift ? scenario.drift->strategies.size() : 0;
  const auto n_tasks = static_cast<std::ptrdiff_t>(1 + n_attacks + n_drift);
  result.attacks.resize(n_attacks);
  result.drift.resize(n_drift);
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_tasks));

  // Cases share nothing mutable; each writes only its own slot.
#pragma omp parallel for schedule(dynamic, 1) num_threads(config.threads > 0 ? config.threads : omp_get_max_threads())
  for (std::ptrdiff_t t = 0; t < n_tasks; ++t) {
    const auto i = static_cast<std::size_t>(t);
    try {
      if (i == 0) {
        const Timestamp ds = attack_start({AttackKind{}, control_day, 0, 0});
        const auto day = events_between(owner_stream, ds, ds + kSecondsPerDay);
        result.control = evaluate_span(trained.at(control_day), day, ds, kSecondsPerDay, config, "owner");
      } else if (i <= n_attacks) {
        const auto& a = scenario.attacks[i - 1];
        const Timestamp start = attack_start(a);
        const auto stream = splice_attack(persona, owner_stream, a.kind, start, a.duration_seconds,
                                          config.utc_offset_seconds, scenario.attack_options);
        result.attacks[i - 1] = evaluate_span(trained.at(a.day), stream, start, a.duration_seconds, config,
                                              std::string(to_string(a.kind)));
      } else {
        const auto& d = *scenario.drift;
        result.drift[i - 1 - n_attacks] =
            run_drift_case(persona, d.move_day, d.days_after, d.strategies[i - 1 - n_attacks], config);
      }
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return result;
}

void write_distances_csv(std::ostream& out, std::span<const DayDistance> distances) {
  out << "day,temporal,spatial,global\n";
  for (const auto& d : distances) {
    out << d.day_index << ',' << format_real(d.temporal) << ',' << format_real(d.spatial) << ','
        << format_real(d.global) << '\n';
  }
}

void write_daily_csv(std::ostream& out, std::string_view scenario, std::span<const DailySummary> days,
                     bool header) {
  if (header) {
    out << "scenario,day,phase,events,windows,challenges,mean,p2";
    for (int p = 10; p <= 90; p += 10) out << ",d" << p;
    out << '\n';
  }
  for (const auto& d : days) {
    out << csv_field(scenario) << ',' << d.day << ',' << to_string(d.phase) << ',' << d.events << ','
        << d.windows << ',' << d.challenges << ',' << format_real(d.mean) << ',' << format_real(d.p2);
    for (double v : d.deciles) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_decisions_csv(std::ostream& out, std::span<const DecisionRecord> decisions) {
  out << "window_start,aggregate,threshold,decision,phase\n";
  for (const auto& d : decisions) {
    out << d.window_start << ',' << format_real(d.aggregate) << ',' << format_real(d.threshold) << ','
        << to_string(d.decision) << ',' << to_string(d.phase) << '\n';
  }
}

void write_samples_csv(std::ostream& out, std::span<const ComfortSample> samples) {
  out << "window_start,hour,location,events,temporal,spatial,gap_penalty,aggregate\n";
  for (const auto& s : samples) {
    out << s.window_start << ',' << s.hour << ',' << csv_field(s.location) << ',' << s.event_count << ','
        << format_real(s.temporal) << ',' << format_real(s.spatial) << ',' << format_real(s.gap_penalty)
        << ',' << format_real(s.aggregate) << '\n';
  }
}

void write_lifecycle_log(std::ostream& out, std::span<const LifecycleEvent> events) {
  out << "at,day,kind,detail\n";
  for (const auto& e : events) {
    out << e.at << ',' << e.day << ',' << csv_field(e.kind) << ',' << csv_field(e.detail) << '\n';
  }
}

void write_scenario_summary_csv(std::ostream& out, const SimulationResult& result) {
  out << "scenario,mean_comfort,detection_rate,time_to_detect,windows,challenges\n";
  auto row = [&](const ScenarioResult& s) {
    out << csv_field(s.name) << ',' << format_real(s.mean_comfort) << ',' << format_real(s.detection_rate)
        << ',' << (s.time_to_detect ? std::to_string(*s.time_to_detect) : std::string()) << ','
        << s.windows << ',' << s.challenges << '\n';
  };
  row(result.control);
  for (const auto& a : result.attacks) row(a);
}

std::vector<std::string> write_simulation(const std::filesystem::path& dir, const Scenario& scenario,
                                          const RunConfig& config, const SimulationResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, auto&& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    body(out);
    files.push_back(name);
  };

  emit("distances.csv", [&](std::ostream& o) { write_distances_csv(o, result.owner.distances); });
  emit("comfort_daily.csv", [&](std::ostream& o) {
    write_daily_csv(o, "owner", result.owner.days);
    for (const auto& d : result.drift) {
      write_daily_csv(o, "drift_" + std::string(to_string(d.strategy)), d.days, false);
    }
  });
  emit("decisions.csv", [&](std::ostream& o) { write_decisions_csv(o, result.owner.decisions); });
  emit("comfort_samples.csv", [&](std::ostream& o) { write_samples_csv(o, result.owner.samples); });
  emit("scenario_summary.csv", [&](std::ostream& o) { write_scenario_summary_csv(o, result); });
  emit("attack_decisions.csv", [&](std::ostream& o) {
    o << "scenario,window_start,aggregate,threshold,decision,phase\n";
    auto rows = [&](const ScenarioResult& s) {
      for (const auto& d : s.decisions) {
        o << csv_field(s.name) << ',' << d.window_start << ',' << format_real(d.aggregate) << ','
          << format_real(d.threshold) << ',' << to_string(d.decision) << ',' << to_string(d.phase) << '\n';
      }
    };
    rows(result.control);
    for (const auto& a : result.attacks) rows(a);
  });
  if (!result.drift.empty()) {
    emit("drift_summary.csv", [&](std::ostream& o) {
      o << "strategy,move_day,pre_move_mean,first3_mean\n";
      for (const auto& d : result.drift) {
        double sum = 0.0;
        int n = 0;
        for (const auto& day : d.days) {
          if (day.day >= d.move_day && day.day < d.move_day + 3) {
            sum += day.mean;
            ++n;
          }
        }
        o << to_string(d.strategy) << ',' << d.move_day << ',' << format_real(d.pre_move_mean) << ','
          << format_real(n > 0 ? sum / n : 0.0) << '\n';
      }
    });
  }
  emit("lifecycle.csv", [&](std::ostream& o) {
    write_lifecycle_log(o, result.owner.events);
  });

  nlohmann::json manifest;
  manifest["tool"] = std::string(version());
  manifest["config"] = to_json(config);
  manifest["scenario"] = to_json(scenario);
  manifest["seed"] = config.seed;
  manifest["files"] = files;
  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  files.push_back("manifest.json");
  return files;
}

}  // namespace implauth
