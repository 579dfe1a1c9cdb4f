#include <gtest/gtest.h>

#include <json.hpp>

#include "implauth/errors.hpp"
#include "implauth/persona.hpp"
#include "implauth/profile.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace implauth;

namespace {

Profile trained(int days, std::uint64_t seed = 4) {
  auto spec = default_persona();
  spec.seed = seed;
  spec.duration_days = days;
  Profile p("owner");
  for (const auto& e : generate_persona(spec)) p.ingest(e);
  return p;
}

std::uint64_t total_observations(const AnchorModel& m) {
  std::uint64_t n = 0;
  for (const auto& [sensor, d] : m.densities()) {
    n += std::visit([](const auto& x) -> std::uint64_t {
      if constexpr (std::is_same_v<std::decay_t<decltype(x)>, DiscreteDensity>) {
        return x.total();
      } else {
        return x.count();
      }
    }, d);
  }
  return n;
}

}  // namespace

TEST(Profile, AppCountsMatchBruteForceScan) {
  auto spec = default_persona();
  spec.duration_days = 3;
  const auto events = generate_persona(spec);
  Profile p("owner");
  for (const auto& e : events) p.ingest(e);
  for (int h = 0; h < 24; ++h) {
    std::uint64_t expected = oracle::count_at_hour(events, SensorKind::app, h);
    const auto* d = p.temporal(h).find(SensorKind::app);
    const std::uint64_t got = d ? std::get<DiscreteDensity>(*d).total() : 0;
    ASSERT_EQ(got, expected) << "hour " << h;

    std::vector<std::string> labels;
    for (const auto& e : events) {
      if (e.sensor == SensorKind::app && local_hour(e.timestamp, 0) == h) {
        labels.push_back(std::get<std::string>(e.value));
      }
    }
    for (const auto& [label, c] : oracle::batch_counts(labels)) {
      ASSERT_EQ(std::get<DiscreteDensity>(*d).count(label), c);
    }
  }
}

TEST(Profile, EveryEventLandsInBothModels) {
  const auto p = trained(2);
  std::uint64_t temporal = 0, spatial = 0;
  for (const auto& m : p.temporal_models()) temporal += total_observations(m);
  for (const auto& [loc, m] : p.spatial_models()) spatial += total_observations(m);
  EXPECT_EQ(temporal, spatial);
  EXPECT_GT(temporal, 0u);
}

TEST(Profile, SingleEventBookkeeping) {
  Profile p("u1");
  p.ingest(fixture::app(1370044800 + 9 * 3600 + 5, "mail", "office"));
  const auto* t = p.temporal(9).find(SensorKind::app);
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(std::get<DiscreteDensity>(*t).count("mail"), 1u);
  ASSERT_NE(p.spatial("office"), nullptr);
  EXPECT_EQ(std::get<DiscreteDensity>(*p.spatial("office")->find(SensorKind::app)).count("mail"), 1u);
  EXPECT_EQ(p.temporal(10).find(SensorKind::app), nullptr);
  EXPECT_EQ(p.days_observed(), 1);
}

TEST(Profile, UtcOffsetShiftsHourSlot) {
  ProfileConfig cfg;
  cfg.utc_offset_seconds = 2 * 3600;
  Profile p("u1", cfg);
  p.ingest(fixture::app(1370044800 + 9 * 3600, "mail"));
  EXPECT_NE(p.temporal(11).find(SensorKind::app), nullptr);
}

TEST(Profile, RejectsOutOfOrderAndMismatchedValues) {
  Profile p("u1");
  p.ingest(fixture::app(100, "a"));
  EXPECT_THROW(p.ingest(fixture::app(99, "a")), OutOfOrderEvent);
  p.advance_clock(500);
  EXPECT_THROW(p.ingest(fixture::app(400, "a")), OutOfOrderEvent);
  EXPECT_THROW(p.ingest(fixture::reading(600, SensorKind::app, 1.0)), InvalidSpec);
}

TEST(Profile, DaysObservedCountsDistinctDays) {
  const auto p = trained(3);
  EXPECT_EQ(p.days_observed(), 3);
}

TEST(Profile, SaveLoadRoundTripIsByteStable) {
  const auto p = trained(2);
  const std::string doc = save_profile(p);
  const Profile back = load_profile(doc);
  EXPECT_EQ(back, p);
  EXPECT_EQ(save_profile(back), doc);
}

TEST(Profile, LoadRejectsForeignVersionAndCorruption) {
  const auto p = trained(1);
  auto doc = nlohmann::json::parse(save_profile(p));
  doc["format_version"] = 999;
  EXPECT_THROW(load_profile(doc.dump()), VersionMismatch);
  EXPECT_THROW(load_profile("{not json"), CorruptDocument);
  EXPECT_THROW(load_profile("{}"), Error);
}

TEST(Snapshot, IsImmutableUnderFurtherIngest) {
  Profile p("u1");
  const Timestamp day0 = 1370044800;
  p.ingest(fixture::app(day0 + 10, "mail"));
  p.advance_clock(day0 + 86400);
  const auto snap = snapshot_day(p, local_day(day0, 0));
  const std::string before = save_profile(*snap);
  for (int i = 0; i < 100; ++i) p.ingest(fixture::app(day0 + 86400 + i, "news", "cafe"));
  EXPECT_EQ(save_profile(*snap), before);
  EXPECT_EQ(snap->spatial("cafe"), nullptr);
}

TEST(Snapshot, DayNotCompleteBeforeMidnight) {
  Profile p("u1");
  const Timestamp day0 = 1370044800;
  p.ingest(fixture::app(day0 + 10, "mail"));
  EXPECT_THROW(snapshot_day(p, local_day(day0, 0)), DayNotComplete);
  p.advance_clock(day0 + 86399);
  EXPECT_THROW(snapshot_day(p, local_day(day0, 0)), DayNotComplete);
  p.advance_clock(day0 + 86400);
  EXPECT_NO_THROW(snapshot_day(p, local_day(day0, 0)));
}
