#include <gtest/gtest.h>

#include <random>

#include "implauth/comfort.hpp"
#include "implauth/errors.hpp"
#include "implauth/persona.hpp"
#include "support/fixtures.hpp"

using namespace implauth;

namespace {

constexpr Timestamp kDay0 = 1370044800;  // local midnight, offset 0

// Hour 9 at "home" has apps {a:3, b:1}; noise is degenerate at 40.
Profile hand_profile() {
  Profile p("u1");
  Timestamp t = kDay0 + 9 * 3600;
  for (const char* s : {"a", "a", "a", "b"}) p.ingest(fixture::app(t++, s));
  return p;
}

}  // namespace

TEST(ScoreSensor, MeanOfModeNormalizedScores) {
  const auto p = hand_profile();
  const std::vector<SensorValue> inputs = {std::string("a"), std::string("b"), std::string("c")};
  EXPECT_NEAR(score_sensor(p, Anchor::time(9), SensorKind::app, inputs), 4.0 / 9.0, 1e-12);
  EXPECT_NEAR(score_sensor(p, Anchor::place("home"), SensorKind::app, inputs), 4.0 / 9.0, 1e-12);
}

TEST(ScoreSensor, MissingAnchorOrSensorScoresZero) {
  const auto p = hand_profile();
  const std::vector<SensorValue> inputs = {std::string("a")};
  EXPECT_EQ(score_sensor(p, Anchor::time(3), SensorKind::app, inputs), 0.0);
  EXPECT_EQ(score_sensor(p, Anchor::place("mars"), SensorKind::app, inputs), 0.0);
  EXPECT_EQ(score_sensor(p, Anchor::time(9), SensorKind::wifi, inputs), 0.0);
  EXPECT_EQ(score_sensor(p, Anchor::time(9), SensorKind::app, {}), 0.0);
}

TEST(GapPenalty, Boundaries) {
  EXPECT_EQ(gap_penalty(0, 30), 0.0);
  EXPECT_EQ(gap_penalty(0, 60), 0.0);
  EXPECT_EQ(gap_penalty(0, 1830), 0.5);
  EXPECT_EQ(gap_penalty(0, 3600), 1.0);
  EXPECT_EQ(gap_penalty(0, 7200), 1.0);
  EXPECT_THROW(gap_penalty(10, 9), NegativeGap);
}

TEST(GapPenalty, MonotoneInGap) {
  double prev = 0.0;
  for (Timestamp g = 0; g <= 4000; g += 7) {
    const double p = gap_penalty(0, g);
    ASSERT_GE(p, prev);
    ASSERT_GE(p, 0.0);
    ASSERT_LE(p, 1.0);
    prev = p;
  }
}

TEST(MajorityLocation, TiesGoToLatestEvent) {
  std::vector<SensorEvent> w = {fixture::app(1, "x", "home"), fixture::app(2, "x", "work"),
                                fixture::app(3, "x", "work"), fixture::app(4, "x", "home")};
  EXPECT_EQ(majority_location(w), "home");
  w.push_back(fixture::app(5, "x", "work"));
  EXPECT_EQ(majority_location(w), "work");
}

TEST(ScoreWindow, HandWorkedAggregate) {
  auto p = hand_profile();
  Timestamp t = kDay0 + 9 * 3600 + 10;
  // noise at hour 9 / home: degenerate at 40, so 40 scores 1 and 1000 scores 0.
  for (int i = 0; i < 5; ++i) p.ingest(fixture::reading(t++, SensorKind::noise, 40.0));

  const Timestamp w0 = kDay0 + 86400 + 9 * 3600 + 120;
  std::vector<SensorEvent> window = {
      fixture::app(w0 + 1, "a"), fixture::app(w0 + 2, "b"), fixture::app(w0 + 3, "c"),
      fixture::reading(w0 + 4, SensorKind::noise, 40.0),
      fixture::reading(w0 + 5, SensorKind::noise, 1000.0)};
  const Timestamp prev = w0 + 1 - 1830;  // gap to the first event: 1830 s
  const auto s = score_window(p, w0, window, prev);
  const double app = 4.0 / 9.0;
  const double noise = 0.5;
  const double model = (app + noise) / 2.0;
  EXPECT_NEAR(s.temporal, model, 1e-12);
  EXPECT_NEAR(s.spatial, model, 1e-12);
  EXPECT_EQ(s.gap_penalty, 0.5);
  EXPECT_NEAR(s.aggregate, model - 0.5, 1e-12);
  EXPECT_EQ(s.event_count, 5u);
  EXPECT_EQ(s.location, "home");
  EXPECT_EQ(s.hour, 9);
  EXPECT_EQ(s.aggregate, recompose_aggregate(s));
}

TEST(ScoreWindow, FullyFamiliarWindowScoresOne) {
  auto p = hand_profile();
  const Timestamp w0 = kDay0 + 86400 + 9 * 3600;
  std::vector<SensorEvent> window = {fixture::app(w0 + 1, "a")};
  const auto s = score_window(p, w0, window, w0 - 10);
  EXPECT_EQ(s.aggregate, 1.0);
}

TEST(ScoreWindow, EmptyWindowDecaysWithStaleGap) {
  const auto p = hand_profile();
  const Timestamp w0 = kDay0 + 86400 + 9 * 3600;
  const auto s = score_window(p, w0, {}, w0 - 3600);
  EXPECT_EQ(s.temporal, 0.0);
  EXPECT_EQ(s.spatial, 0.0);
  EXPECT_EQ(s.aggregate, -1.0);
  EXPECT_TRUE(s.location.empty());
  const auto first = score_window(p, w0, {}, std::nullopt);
  EXPECT_EQ(first.aggregate, 0.0);
}

TEST(ScoreWindow, BoundsAndRecomposeOnGeneratedStreams) {
  auto spec = default_persona();
  spec.duration_days = 3;
  Profile p("owner");
  for (const auto& e : generate_persona(spec)) p.ingest(e);

  auto day = spec;
  day.start_ts = spec.start_ts + 3 * kSecondsPerDay;
  day.duration_days = 1;
  day.seed = 77;
  const auto events = generate_persona(day);
  std::optional<Timestamp> prev;
  std::size_t i = 0;
  for (Timestamp w = day.start_ts; w < day.start_ts + kSecondsPerDay; w += 60) {
    std::size_t j = i;
    while (j < events.size() && events[j].timestamp < w + 60) ++j;
    const std::span<const SensorEvent> window(events.data() + i, j - i);
    const auto s = score_window(p, w, window, prev);
    ASSERT_GE(s.aggregate, -1.0);
    ASSERT_LE(s.aggregate, 1.0);
    ASSERT_GE(s.temporal, 0.0);
    ASSERT_LE(s.temporal, 1.0);
    ASSERT_GE(s.spatial, 0.0);
    ASSERT_LE(s.spatial, 1.0);
    for (const auto& [k, v] : s.sensor_scores) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    ASSERT_EQ(recompose_aggregate(s), s.aggregate);
    if (j > i) prev = events[j - 1].timestamp;
    i = j;
  }
}

TEST(ScoreWindow, LargerGapNeverRaisesAggregate) {
  const auto p = hand_profile();
  const Timestamp w0 = kDay0 + 86400 + 9 * 3600;
  std::vector<SensorEvent> window = {fixture::app(w0 + 1, "b")};
  double last = 2.0;
  for (Timestamp gap = 0; gap < 5000; gap += 50) {
    const double a = score_window(p, w0, window, w0 + 1 - gap).aggregate;
    ASSERT_LE(a, last);
    last = a;
  }
}
