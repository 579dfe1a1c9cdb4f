#include <gtest/gtest.h>

#include <sstream>

#include "implauth/errors.hpp"
#include "implauth/harness.hpp"
#include "implauth/report.hpp"
#include "support/fixtures.hpp"

using namespace implauth;

namespace {

std::vector<SensorEvent> owner_stream(int days, std::uint64_t seed = 42) {
  auto spec = default_persona();
  spec.seed = seed;
  spec.duration_days = days;
  return generate_persona(spec);
}

std::string csv_of(const ReplayResult& r) {
  std::ostringstream os;
  write_distances_csv(os, r.distances);
  write_daily_csv(os, "owner", r.days);
  write_decisions_csv(os, r.decisions);
  write_samples_csv(os, r.samples);
  write_lifecycle_log(os, r.events);
  return os.str();
}

}  // namespace

TEST(Replay, EmptyStreamGivesEmptyResult) {
  const auto r = replay({}, RunConfig{});
  EXPECT_TRUE(r.days.empty());
  EXPECT_TRUE(r.decisions.empty());
  EXPECT_FALSE(r.converged_day.has_value());
  EXPECT_EQ(r.lifecycle.state.phase, Phase::training);
}

TEST(Replay, RejectsUnsortedStream) {
  std::vector<SensorEvent> e = {fixture::app(100, "a"), fixture::app(50, "a")};
  EXPECT_THROW(replay(e, RunConfig{}), OutOfOrderEvent);
}

TEST(Replay, StationaryPersonaConvergesAndChallengesRarely) {
  const auto events = owner_stream(21);
  const auto r = replay(events, RunConfig{});
  ASSERT_TRUE(r.converged_day.has_value());
  const std::int64_t first = local_day(events.front().timestamp, 0);
  const std::int64_t days_to_converge = *r.converged_day - first + 1;
  EXPECT_GE(days_to_converge, 3);
  EXPECT_LE(days_to_converge, 14);
  EXPECT_EQ(r.lifecycle.state.phase, Phase::deployed);
  ASSERT_NE(r.deployed, nullptr);

  std::size_t challenges = 0;
  for (const auto& d : r.decisions) {
    EXPECT_NE(d.phase, Phase::training);
    challenges += d.decision == Decision::challenge;
  }
  ASSERT_FALSE(r.decisions.empty());
  const double rate = static_cast<double>(challenges) / static_cast<double>(r.decisions.size());
  EXPECT_GE(rate, 0.005);
  EXPECT_LE(rate, 0.05);

  // The deployed profile is the one frozen at convergence.
  EXPECT_TRUE(r.profile.temporal_models() == r.deployed->temporal_models());
  EXPECT_TRUE(r.profile.spatial_models() == r.deployed->spatial_models());
}

TEST(Replay, DeterministicAcrossPolicies) {
  const auto events = owner_stream(8);
  ReplayOptions serial;
  serial.policy = ExecPolicy::serial;
  const auto a = replay(events, RunConfig{});
  const auto b = replay(events, RunConfig{}, serial);
  const auto c = replay(events, RunConfig{});
  EXPECT_EQ(csv_of(a), csv_of(b));
  EXPECT_EQ(csv_of(a), csv_of(c));
}

TEST(Replay, DailySummariesAgreeWithDecisionLog) {
  const auto events = owner_stream(14);
  const auto r = replay(events, RunConfig{});
  const auto rolled = aggregate_decisions(r.decisions);
  std::map<std::int64_t, std::size_t> by_day;
  for (const auto& d : rolled) by_day[d.day] = d.challenges;
  for (const auto& d : r.days) {
    if (by_day.count(d.day)) EXPECT_EQ(by_day[d.day], d.challenges) << "day " << d.day;
  }
}

TEST(Replay, RetrainFreshStartsOver) {
  const auto events = owner_stream(16);
  ReplayOptions opts;
  const std::int64_t first = local_day(events.front().timestamp, 0);
  opts.retrain_at_day[first + 12] = RetrainMode::fresh;
  const auto r = replay(events, RunConfig{}, opts);
  bool started = false;
  for (const auto& e : r.events) started |= e.kind == "retrain_started";
  EXPECT_TRUE(started);
  EXPECT_LE(r.profile.days_observed(), 4);
}

TEST(Attack, DetectionRateMatchesDecisionLog) {
  auto spec = default_persona();
  spec.duration_days = 31;
  const auto owner = generate_persona(spec);
  const Timestamp start = spec.start_ts + 30 * kSecondsPerDay + 14 * kSecondsPerHour;
  const auto res =
      run_attack(spec, owner, AttackKind::uninformed_outsider, start, 4 * 3600, RunConfig{});
  ASSERT_EQ(res.decisions.size(), res.windows);
  EXPECT_EQ(res.windows, 240u);
  std::size_t ch = 0;
  double sum = 0.0;
  std::optional<Timestamp> first;
  for (const auto& d : res.decisions) {
    ASSERT_GE(d.window_start, start);
    ASSERT_LT(d.window_start, start + 4 * 3600);
    if (d.decision == Decision::challenge) {
      ++ch;
      if (!first) first = d.window_start;
    }
    sum += d.aggregate;
  }
  EXPECT_EQ(ch, res.challenges);
  EXPECT_DOUBLE_EQ(res.detection_rate, static_cast<double>(ch) / 240.0);
  EXPECT_NEAR(res.mean_comfort, sum / 240.0, 1e-12);
  ASSERT_TRUE(first.has_value());
  EXPECT_EQ(res.time_to_detect, *first + 60 - start);
  EXPECT_GE(res.detection_rate, 0.95);
}

TEST(Attack, NeedsDeploymentFirst) {
  auto spec = default_persona();
  spec.duration_days = 2;
  const auto owner = generate_persona(spec);
  EXPECT_THROW(run_attack(spec, owner, AttackKind::informed_insider,
                          spec.start_ts + kSecondsPerDay + 3600, 3600, RunConfig{}),
               NotDeployedBeforeAttack);
}

TEST(ScoreStream, OneDecisionPerWindow) {
  const auto events = owner_stream(7);
  const auto r = replay(events, RunConfig{});
  std::vector<SensorEvent> hour;
  for (const auto& e : events) {
    if (e.timestamp >= events.front().timestamp + 6 * kSecondsPerDay &&
        e.timestamp < events.front().timestamp + 6 * kSecondsPerDay + 3600) {
      hour.push_back(e);
    }
  }
  std::vector<ComfortSample> samples;
  const auto out = score_stream(r.profile, 0.2, hour, RunConfig{}, &samples);
  EXPECT_EQ(out.size(), samples.size());
  EXPECT_GE(out.size(), 59u);
  EXPECT_LE(out.size(), 60u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].threshold, 0.2);
    EXPECT_EQ(out[i].decision == Decision::challenge, samples[i].aggregate < 0.2);
  }
  EXPECT_TRUE(score_stream(r.profile, 0.2, {}, RunConfig{}).empty());
}

TEST(Report, DecisionCsvRoundTrip) {
  std::vector<DecisionRecord> log = {{0, 0.5, 0.2, Decision::comfortable, Phase::deployed, 0.6, 0.4},
                                     {60, 0.1, 0.2, Decision::challenge, Phase::deployed, 0.1, 0.1},
                                     {86400, 0.3, 0.25, Decision::comfortable, Phase::retraining, 0, 0}};
  std::stringstream buf;
  write_decisions_csv(buf, log);
  const auto back = read_decisions_csv(buf);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[1].decision, Decision::challenge);
  EXPECT_EQ(back[2].phase, Phase::retraining);
  const auto days = aggregate_decisions(back);
  ASSERT_EQ(days.size(), 2u);
  EXPECT_EQ(days[0].windows, 2u);
  EXPECT_EQ(days[0].challenges, 1u);
  EXPECT_EQ(days[0].challenge_rate, 0.5);
  EXPECT_EQ(days[1].threshold, 0.25);
  std::istringstream bad("window_start,aggregate,threshold,decision,phase\nx,1,2,challenge,deployed\n");
  EXPECT_THROW(read_decisions_csv(bad), CorruptDocument);
}
