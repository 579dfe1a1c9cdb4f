#include <gtest/gtest.h>

#include "implauth/config.hpp"
#include "implauth/errors.hpp"

using namespace implauth;

TEST(RunConfig, DefaultsMatchTheDocumentedConstants) {
  const RunConfig c;
  EXPECT_EQ(c.percentile, 2.0);
  EXPECT_EQ(c.convergence_threshold, 0.1);
  EXPECT_EQ(c.consecutive_days, 2);
  EXPECT_EQ(c.window_seconds, 60);
  EXPECT_EQ(c.gap_zero_seconds, 60);
  EXPECT_EQ(c.gap_one_seconds, 3600);
  EXPECT_EQ(c.kde_bins, 256);
  EXPECT_EQ(c.levenshtein_top_k, 50);
  EXPECT_EQ(c.retrain_window_seconds, 4 * 3600);
  EXPECT_NO_THROW(validate(c));
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c;
  c.percentile = 5.0;
  c.seed = 1234567890123ULL;
  c.utc_offset_seconds = -7200;
  EXPECT_EQ(load_run_config(save_run_config(c)), c);
  EXPECT_EQ(run_config_from_json(nlohmann::json::object()), RunConfig{});
}

TEST(RunConfig, RejectsUnknownKeysBadTypesAndRanges) {
  EXPECT_THROW(run_config_from_json({{"percentil", 2}}), InvalidConfig);
  EXPECT_THROW(run_config_from_json({{"percentile", "two"}}), InvalidConfig);
  EXPECT_THROW(run_config_from_json({{"percentile", 0}}), InvalidConfig);
  EXPECT_THROW(run_config_from_json({{"gap_zero_seconds", 4000}}), InvalidConfig);
  EXPECT_THROW(load_run_config("not json"), InvalidConfig);
}

TEST(RunConfig, Overrides) {
  RunConfig c;
  apply_override(c, "percentile=5");
  apply_override(c, "seed=7");
  apply_override(c, "convergence_threshold=0.05");
  EXPECT_EQ(c.percentile, 5.0);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.convergence_threshold, 0.05);
  EXPECT_THROW(apply_override(c, "nonsense=1"), InvalidConfig);
  EXPECT_THROW(apply_override(c, "percentile"), InvalidConfig);
  EXPECT_THROW(apply_override(c, "kde_bins=1"), InvalidConfig);
}

TEST(RunConfig, DerivedModuleConfigs) {
  RunConfig c;
  c.kde_bins = 128;
  c.utc_offset_seconds = 3600;
  c.levenshtein_top_k = 10;
  EXPECT_EQ(c.profile_config().density.bins, 128);
  EXPECT_EQ(c.profile_config().utc_offset_seconds, 3600);
  EXPECT_EQ(c.comfort_config().utc_offset_seconds, 3600);
  EXPECT_EQ(c.stability_config().top_k, 10u);
  EXPECT_EQ(c.lifecycle_config().retrain_window_seconds, 4 * 3600);
}

TEST(Persona, JsonRoundTrip) {
  const auto p = default_persona();
  EXPECT_EQ(persona_from_json(to_json(p)), p);
  auto doc = to_json(p);
  doc["event_rate"] = -1;
  EXPECT_THROW(persona_from_json(doc), InvalidSpec);
}

TEST(Scenario, JsonRoundTrip) {
  const auto s = default_scenario();
  const auto back = scenario_from_json(to_json(s));
  EXPECT_EQ(back.name, s.name);
  EXPECT_EQ(back.persona, s.persona);
  EXPECT_EQ(back.attacks, s.attacks);
  EXPECT_EQ(back.drift, s.drift);
  EXPECT_EQ(back.attack_options.baseline_shift_sd, s.attack_options.baseline_shift_sd);
  EXPECT_EQ(to_json(back), to_json(s));
}

TEST(Scenario, DefaultHasFourAttacksAndThreeStrategies) {
  const auto s = default_scenario();
  ASSERT_EQ(s.attacks.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(s.attacks[i].kind, all_attack_kinds()[i]);
  ASSERT_TRUE(s.drift.has_value());
  EXPECT_EQ(s.drift->strategies.size(), 3u);
}

TEST(Scenario, RejectsUnknownAttackKind) {
  auto doc = to_json(default_scenario());
  doc["attacks"][0]["kind"] = "martian";
  EXPECT_THROW(scenario_from_json(doc), InvalidScenario);
  EXPECT_THROW(parse_drift_strategy("teleport"), InvalidScenario);
}
