// implauth: train, score, simulate, gen, report.
//
// Exit status: 0 ok, 1 error, 2 training did not converge, 3 profile not
// deployed, 4 profile format version mismatch.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "implauth/config.hpp"
#include "implauth/errors.hpp"
#include "implauth/harness.hpp"
#include "implauth/report.hpp"

namespace fs = std::filesystem;
using namespace implauth;

namespace {

enum Exit { kOk = 0, kError = 1, kNotConverged = 2, kNotDeployed = 3, kVersionMismatch = 4 };

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

StreamFormat format_for(const fs::path& path, const std::string& flag) {
  if (!flag.empty()) return parse_stream_format(flag);
  return path.extension() == ".jsonl" ? StreamFormat::jsonl : StreamFormat::csv;
}

std::vector<SensorEvent> read_stream(const fs::path& path, const std::string& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  auto parsed = parse_stream(in, format_for(path, format));
  if (parsed.rejected_count() > 0) {
    std::cerr << "implauth: skipped " << parsed.rejected_count() << " malformed record(s)";
    const auto& first = parsed.rejected.front();
    std::cerr << ", first at line " << first.line << ": " << first.reason << '\n';
  }
  return std::move(parsed.events);
}

struct ConfigFlags {
  std::string file;
  std::vector<std::string> overrides;

  void add(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "run configuration (JSON)");
    cmd->add_option("--set", overrides, "override a config key, e.g. --set percentile=5");
  }

  RunConfig load() const {
    RunConfig c = file.empty() ? RunConfig{} : load_run_config(read_file(file));
    for (const auto& o : overrides) apply_override(c, o);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit authentication engine: profile training, comfort scoring and attack simulation"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "build a profile from an owner stream");
  ConfigFlags train_cfg;
  train_cfg.add(train);
  std::string train_input, train_format, train_profile = "profile.json", train_dir = ".";
  train->add_option("-i,--input", train_input, "event stream (csv or jsonl)")->required();
  train->add_option("--format", train_format, "csv or jsonl; default from the file extension");
  train->add_option("-p,--profile", train_profile, "profile output path");
  train->add_option("-o,--out-dir", train_dir, "directory for the CSV outputs");

  // score
  auto* score = app.add_subcommand("score", "score a stream against a deployed profile");
  ConfigFlags score_cfg;
  score_cfg.add(score);
  std::string score_profile, score_input, score_format, score_out = "decisions.csv";
  std::optional<double> score_threshold;
  bool score_force = false;
  score->add_option("-p,--profile", score_profile, "profile file")->required();
  score->add_option("-i,--input", score_input, "event stream")->required();
  score->add_option("--format", score_format, "csv or jsonl");
  score->add_option("-o,--out", score_out, "decision log output");
  score->add_option("--threshold", score_threshold, "use this threshold instead of the profile's");
  score->add_flag("--force", score_force, "score with a profile that is still training");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the persona, attack and drift scenarios");
  ConfigFlags sim_cfg;
  sim_cfg.add(sim);
  std::string sim_scenario, sim_dir = "sim_out";
  std::optional<int> sim_threads;
  sim->add_option("-s,--scenario", sim_scenario, "scenario file (JSON); default scenario if omitted");
  sim->add_option("-o,--out-dir", sim_dir, "output directory");
  sim->add_option("-j,--threads", sim_threads, "worker threads (0 = all)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a persona or attack stream");
  std::string gen_persona, gen_out = "stream.csv", gen_format, gen_attack;
  std::optional<std::uint64_t> gen_seed;
  std::optional<int> gen_days;
  int gen_attack_day = 28, gen_attack_hour = 14;
  std::int64_t gen_attack_duration = 4 * 3600;
  gen->add_option("--persona", gen_persona, "persona file (JSON); default persona if omitted");
  gen->add_option("-o,--out", gen_out, "stream output");
  gen->add_option("--format", gen_format, "csv or jsonl");
  gen->add_option("--seed", gen_seed, "override the persona seed");
  gen->add_option("--days", gen_days, "override the persona duration");
  gen->add_option("--attack", gen_attack, "emit this attack's stream instead of the owner's");
  gen->add_option("--attack-day", gen_attack_day, "attack day offset");
  gen->add_option("--attack-hour", gen_attack_hour, "attack start hour (local)");
  gen->add_option("--attack-duration", gen_attack_duration, "attack length in seconds");

  // report
  auto* rep = app.add_subcommand("report", "aggregate a decision log into per-day plot data");
  std::string rep_in, rep_out = "decision_days.csv";
  std::int64_t rep_offset = 0;
  rep->add_option("-i,--decisions", rep_in, "decision log")->required();
  rep->add_option("-o,--out", rep_out, "per-day output");
  rep->add_option("--utc-offset", rep_offset, "seconds east of UTC");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*train) {
      const auto cfg = train_cfg.load();
      const auto events = read_stream(train_input, train_format);
      const auto r = replay(events, cfg);
      open_out(train_profile) << save_profile(r.profile);
      const fs::path dir = train_dir;
      fs::create_directories(dir);
      {
        auto out = open_out(dir / "distances.csv");
        write_distances_csv(out, r.distances);
      }
      {
        auto out = open_out(dir / "comfort_daily.csv");
        write_daily_csv(out, r.profile.user_id(), r.days);
      }
      {
        auto out = open_out(dir / "decisions.csv");
        write_decisions_csv(out, r.decisions);
      }
      {
        auto out = open_out(dir / "lifecycle.csv");
        write_lifecycle_log(out, r.events);
      }
      if (r.converged_day) {
        std::cout << "converged on day " << *r.converged_day << " ("
                  << (*r.converged_day - local_day(events.front().timestamp, cfg.utc_offset_seconds) + 1)
                  << " days of training)\n";
        return kOk;
      }
      std::cout << "not converged after " << r.days.size() << " day(s)\n";
      return kNotConverged;
    }

    if (*score) {
      const auto cfg = score_cfg.load();
      const auto profile = load_profile(read_file(score_profile));
      const auto& rec = profile.lifecycle();
      if (rec.state.phase == Phase::training && !score_force) {
        throw NotDeployed("profile is still training; pass --force to score anyway");
      }
      double threshold = 0.0;
      if (score_threshold) {
        threshold = *score_threshold;
      } else if (rec.threshold.has_history()) {
        threshold = rec.threshold.current;
      } else {
        throw NotDeployed("profile has no detection threshold; pass --threshold");
      }
      const auto events = read_stream(score_input, score_format);
      const auto decisions = score_stream(profile, threshold, events, cfg);
      auto out = open_out(score_out);
      write_decisions_csv(out, decisions);
      std::size_t challenges = 0;
      for (const auto& d : decisions) challenges += d.decision == Decision::challenge;
      std::cout << decisions.size() << " window(s), " << challenges << " challenge(s)\n";
      return kOk;
    }

    if (*sim) {
      auto cfg = sim_cfg.load();
      if (sim_threads) cfg.threads = *sim_threads;
      validate(cfg);
      Scenario scenario = default_scenario();
      if (!sim_scenario.empty()) {
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(read_file(sim_scenario));
        } catch (const nlohmann::json::exception& e) {
          throw InvalidScenario(std::string("scenario is not valid JSON: ") + e.what());
        }
        scenario = scenario_from_json(doc);
      }
      const auto result = simulate(scenario, cfg);
      for (const auto& f : write_simulation(sim_dir, scenario, cfg, result)) std::cout << (fs::path(sim_dir) / f).string() << '\n';
      return kOk;
    }

    if (*gen) {
      PersonaSpec persona = default_persona();
      if (!gen_persona.empty()) persona = persona_from_json(nlohmann::json::parse(read_file(gen_persona)));
      if (gen_seed) persona.seed = *gen_seed;
      if (gen_days) persona.duration_days = *gen_days;
      validate(persona);
      std::vector<SensorEvent> events;
      if (gen_attack.empty()) {
        events = generate_persona(persona);
      } else {
        const auto kind = parse_attack_kind(gen_attack);
        const Timestamp start = day_start(local_day(persona.start_ts, persona.utc_offset_seconds) + gen_attack_day,
                                          persona.utc_offset_seconds) +
                                static_cast<Timestamp>(gen_attack_hour) * kSecondsPerHour;
        events = generate_attack(persona, kind, start, gen_attack_duration);
      }
      auto out = open_out(gen_out);
      write_stream(out, events, format_for(gen_out, gen_format));
      std::cout << events.size() << " event(s) written to " << gen_out << '\n';
      return kOk;
    }

    if (*rep) {
      std::ifstream in(rep_in, std::ios::binary);
      if (!in) throw Error("cannot open " + rep_in);
      const auto days = aggregate_decisions(read_decisions_csv(in), rep_offset);
      auto out = open_out(rep_out);
      write_decision_days_csv(out, days);
      return kOk;
    }
  } catch (const VersionMismatch& e) {
    std::cerr << "implauth: " << e.what() << '\n';
    return kVersionMismatch;
  } catch (const NotDeployed& e) {
    std::cerr << "implauth: " << e.what() << '\n';
    return kNotDeployed;
  } catch (const std::exception& e) {
    std::cerr << "implauth: error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
