#include "implauth/lifecycle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "implauth/errors.hpp"

namespace implauth {

namespace {

constexpr std::array<double, 9> kDecilePoints = {10, 20, 30, 40, 50, 60, 70, 80, 90};

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

std::vector<double> aggregates(std::span<const ComfortSample> samples) {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.aggregate);
  return v;
}

void enter_deployment(LifecycleRecord& r, std::int64_t day) {
  r.state.phase = Phase::deployed;
  r.state.retrain_deadline.reset();
  r.state.deployed_since = day;
  r.drift.baseline.reset();
  r.drift.baseline_days.clear();
  r.drift.consecutive_breaches = 0;
}

}  // namespace

LifecycleRecord make_lifecycle_record(const LifecycleConfig& config) {
  if (!(config.percentile > 0.0 && config.percentile < 100.0)) {
    throw InvalidConfig("percentile must lie in (0, 100)");
  }
  LifecycleRecord r;
  r.threshold.percentile = config.percentile;
  r.threshold.window_days = config.threshold_window_days;
  r.drift.breach_distance = config.drift_breach_distance;
  r.drift.breach_days = config.drift_breach_days;
  r.drift.baseline_days_required = config.drift_baseline_days;
  return r;
}

std::string_view to_string(Decision decision) {
  return decision == Decision::challenge ? "challenge" : "comfortable";
}

std::string_view to_string(RetrainMode mode) { return mode == RetrainMode::fresh ? "fresh" : "update"; }

RetrainMode parse_retrain_mode(std::string_view name) {
  if (name == "update") return RetrainMode::update;
  if (name == "fresh") return RetrainMode::fresh;
  throw InvalidScenario("unknown retrain mode '" + std::string(name) + "'");
}

double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw EmptyDay("percentile of an empty day");
  if (!(p > 0.0 && p < 100.0)) throw InvalidConfig("percentile must lie in (0, 100)");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

double daily_percentile(std::span<const ComfortSample> samples, double p) {
  return nearest_rank(aggregates(samples), p);
}

Deciles comfort_deciles(std::span<const ComfortSample> samples) {
  if (samples.empty()) throw EmptyDay("deciles of an empty day");
  auto values = aggregates(samples);
  std::sort(values.begin(), values.end());
  Deciles out{};
  const auto n = values.size();
  for (std::size_t i = 0; i < kDecilePoints.size(); ++i) {
    auto rank = static_cast<std::size_t>(std::ceil(kDecilePoints[i] / 100.0 * static_cast<double>(n)));
    out[i] = values[std::clamp<std::size_t>(rank, 1, n) - 1];
  }
  return out;
}

double current_threshold(const ThresholdState& threshold) {
  if (threshold.daily.empty()) throw NoHistory("no daily percentile recorded yet");
  const std::size_t window = static_cast<std::size_t>(std::max(threshold.window_days, 1));
  const std::size_t take = std::min(window, threshold.daily.size());
  std::vector<double> recent;
  recent.reserve(take);
  for (auto it = threshold.daily.end() - static_cast<std::ptrdiff_t>(take); it != threshold.daily.end(); ++it) {
    recent.push_back(it->second);
  }
  std::sort(recent.begin(), recent.end());
  const std::size_t mid = recent.size() / 2;
  return recent.size() % 2 == 1 ? recent[mid] : 0.5 * (recent[mid - 1] + recent[mid]);
}

DecisionRecord decide(const ComfortSample& sample, const ThresholdState& threshold, Phase phase) {
  if (!threshold.has_history()) throw NoHistory("no detection threshold yet");
  DecisionRecord d;
  d.window_start = sample.window_start;
  d.aggregate = sample.aggregate;
  d.threshold = threshold.current;
  d.decision = sample.aggregate < threshold.current ? Decision::challenge : Decision::comfortable;
  d.phase = phase;
  d.temporal = sample.temporal;
  d.spatial = sample.spatial;
  return d;
}

double drift_distance(const Deciles& day, const Deciles& baseline) {
  double sq = 0.0;
  for (std::size_t i = 0; i < day.size(); ++i) sq += (day[i] - baseline[i]) * (day[i] - baseline[i]);
  return std::sqrt(sq) / 2.0;
}

bool check_drift(DriftState& drift, std::span<const ComfortSample> day_samples) {
  if (!drift.baseline) throw BaselineNotReady("drift baseline not established");
  drift.last_distance = drift_distance(comfort_deciles(day_samples), *drift.baseline);
  if (drift.last_distance > drift.breach_distance) {
    ++drift.consecutive_breaches;
  } else {
    drift.consecutive_breaches = 0;
  }
  return drift.consecutive_breaches >= drift.breach_days;
}

std::vector<LifecycleEvent> end_of_day(LifecycleRecord& r, std::int64_t day,
                                       std::span<const DayDistance> history,
                                       std::span<const ComfortSample> day_samples,
                                       Timestamp day_end, const LifecycleConfig& config) {
  if (r.last_closed_day && day <= *r.last_closed_day) throw DoubleClose(day);
  r.last_closed_day = day;
  std::vector<LifecycleEvent> events;

  switch (r.state.phase) {
    case Phase::training:
    case Phase::retraining: {
      if (is_converged(history, config.convergence_threshold, config.consecutive_days)) {
        const bool was_retraining = r.state.phase == Phase::retraining;
        enter_deployment(r, day);
        if (!day_samples.empty()) {
          const double p = daily_percentile(day_samples, r.threshold.percentile);
          r.threshold.daily = {{day, p}};
          r.threshold.current = p;
        }
        events.push_back({day_end, day, "converged",
                          was_retraining ? "retrained profile deployed" : "profile deployed"});
      } else if (r.state.phase == Phase::retraining && r.state.retrain_deadline &&
                 *r.state.retrain_deadline <= day_end) {
        if (auto e = expire_retrain(r, day_end, day)) events.push_back(*e);
      }
      break;
    }
    case Phase::deployed: {
      if (day_samples.empty()) break;
      const double p = daily_percentile(day_samples, r.threshold.percentile);
      r.threshold.daily.emplace_back(day, p);
      r.threshold.current = current_threshold(r.threshold);
      if (!r.drift.baseline) {
        r.drift.baseline_days.push_back(comfort_deciles(day_samples));
        if (static_cast<int>(r.drift.baseline_days.size()) >= r.drift.baseline_days_required) {
          Deciles mean{};
          for (const auto& d : r.drift.baseline_days) {
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += d[i];
          }
          for (double& v : mean) v /= static_cast<double>(r.drift.baseline_days.size());
          r.drift.baseline = mean;
        }
      } else if (check_drift(r.drift, day_samples)) {
        events.push_back({day_end, day, "drift_suggested",
                          "decile distance " + fixed3(r.drift.last_distance) + " for " +
                              std::to_string(r.drift.consecutive_breaches) + " days"});
      }
      break;
    }
  }
  return events;
}

LifecycleEvent begin_retrain(LifecycleRecord& r, RetrainMode mode, bool authenticated, Timestamp now,
                             Profile& profile, const LifecycleConfig& config) {
  if (!authenticated) throw NotAuthenticated("retraining requires explicit authentication");
  if (mode == RetrainMode::fresh) profile = Profile(profile.user_id(), profile.config());
  r.state.phase = Phase::retraining;
  r.state.retrain_deadline = now + config.retrain_window_seconds;
  const std::int64_t day = local_day(now, profile.config().utc_offset_seconds);
  return {now, day, "retrain_started", std::string(to_string(mode))};
}

LifecycleEvent extend_retrain(LifecycleRecord& r, bool authenticated, Timestamp now,
                              const LifecycleConfig& config) {
  if (!authenticated) throw NotAuthenticated("extending retraining requires authentication");
  if (r.state.phase != Phase::retraining) throw Error("not retraining");
  r.state.retrain_deadline = now + config.retrain_window_seconds;
  return {now, local_day(now, 0), "retrain_extended", {}};
}

std::optional<LifecycleEvent> expire_retrain(LifecycleRecord& r, Timestamp now, std::int64_t day) {
  if (r.state.phase != Phase::retraining || !r.state.retrain_deadline ||
      *r.state.retrain_deadline > now) {
    return std::nullopt;
  }
  enter_deployment(r, day);
  return LifecycleEvent{now, day, "retrain_expired", "deployed with partial retraining"};
}

}  // namespace implauth
