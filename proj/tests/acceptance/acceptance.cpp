// Acceptance suite: prints one PASS/FAIL line per criterion, exits nonzero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <unistd.h>

#include "implauth/comfort.hpp"
#include "implauth/density.hpp"
#include "implauth/errors.hpp"
#include "implauth/harness.hpp"
#include "implauth/stability.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace implauth;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      out_.ok = false;
      if (!out_.detail.empty()) out_.detail += "; ";
      out_.detail += what;
    }
  }
  void note(const std::string& s) {
    if (out_.ok) out_.detail = s;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// Shared by criteria 6 and 7.
const SimulationResult& default_simulation() {
  static const SimulationResult result = simulate(default_scenario(), RunConfig{});
  return result;
}

Outcome equation_fidelity() {
  Check c;
  constexpr Timestamp day0 = 1370044800;
  Profile p("u1");
  Timestamp t = day0 + 9 * 3600;
  for (const char* s : {"a", "a", "a", "b"}) p.ingest(fixture::app(t++, s));
  for (int i = 0; i < 5; ++i) p.ingest(fixture::reading(t++, SensorKind::noise, 40.0));

  const Timestamp w0 = day0 + 86400 + 9 * 3600 + 120;
  const std::vector<SensorEvent> window = {
      fixture::app(w0 + 1, "a"), fixture::app(w0 + 2, "b"), fixture::app(w0 + 3, "c"),
      fixture::reading(w0 + 4, SensorKind::noise, 40.0),
      fixture::reading(w0 + 5, SensorKind::noise, 1000.0)};
  const auto s = score_window(p, w0, window, w0 + 1 - 1830);
  // Sensors: app (1 + 1/3 + 0)/3, noise (1 + 0)/2; models average them; gap 1830 s.
  const double model = (4.0 / 9.0 + 0.5) / 2.0;
  const double expected = model - (1830.0 - 60.0) / 3540.0;
  c.expect(std::abs(s.temporal - model) <= 1e-12, "temporal " + fmt(s.temporal));
  c.expect(std::abs(s.spatial - model) <= 1e-12, "spatial " + fmt(s.spatial));
  c.expect(std::abs(s.aggregate - expected) <= 1e-12, "aggregate " + fmt(s.aggregate));
  c.expect(gap_penalty(0, 60) == 0.0, "gap at 60 s not 0");
  c.expect(gap_penalty(0, 3600) == 1.0, "gap at 3600 s not 1");
  c.note("aggregate " + fmt(s.aggregate) + " vs " + fmt(expected));
  return c.result();
}

Outcome density_correctness() {
  Check c;
  std::mt19937_64 rng(2024);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e"};
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> items(1 + rng() % 60);
    for (auto& s : items) s = alphabet[rng() % alphabet.size()];
    std::shuffle(items.begin(), items.end(), rng);
    DiscreteDensity d;
    for (const auto& s : items) d.observe(s);
    const auto batch = oracle::batch_counts(items);
    bool same = d.counts().size() == batch.size();
    for (const auto& [k, n] : batch) same = same && d.count(k) == n;
    bad += same ? 0 : 1;
  }
  c.expect(bad == 0, std::to_string(bad) + " histogram mismatches");

  DensityConfig cfg;
  cfg.fixed_bandwidth = 0.4;
  ContinuousDensity kde(cfg, -8.0, 8.0);
  std::normal_distribution<double> draw(0.0, 1.5);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(std::clamp(draw(rng), -4.5, 4.5));
    kde.observe(xs.back());
  }
  const std::vector<double> hs(xs.size(), 0.4);
  double worst = 0.0;
  std::vector<double> ys;
  for (int g = 0; g < kde.bins(); ++g) {
    const double x = kde.grid_point(g);
    ys.push_back(kde.density_at(x));
    worst = std::max(worst, std::abs(ys.back() - oracle::kernel_sum(xs, hs, x)));
  }
  const double integral = oracle::trapezoid(ys, kde.step());
  c.expect(kde.grid_min() == -8.0 && kde.grid_max() == 8.0, "grid moved");
  c.expect(worst <= 1e-6, "kde max error " + fmt(worst));
  c.expect(std::abs(integral - 1.0) <= 1e-3, "integral " + fmt(integral));
  c.note("kde max error " + fmt(worst) + ", integral " + fmt(integral));
  return c.result();
}

std::size_t memo_levenshtein(const std::vector<char>& a, const std::vector<char>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    auto it = memo.find({i, j});
    if (it != memo.end()) return it->second;
    const std::size_t v = a[i] == b[j]
                              ? go(i + 1, j + 1)
                              : 1 + std::min({go(i + 1, j), go(i, j + 1), go(i + 1, j + 1)});
    memo[{i, j}] = v;
    return v;
  };
  return go(0, 0);
}

Outcome stability_metrics() {
  Check c;
  auto spec = default_persona();
  spec.duration_days = 2;
  const auto events = generate_persona(spec);
  const std::int64_t d0 = local_day(spec.start_ts, 0);
  Profile p("owner");
  for (const auto& e : events) p.ingest(e);
  p.advance_clock(day_start(d0 + 2, 0));
  auto a = snapshot_day(p, d0 + 1);
  auto b = a;
  b.day_index = d0 + 2;
  c.expect(day_distance(a, b).global == 0.0, "identical snapshots not 0");

  Profile x("u"), y("u");
  x.ingest(fixture::app(day_start(d0, 0) + 10, "x", "here"));
  x.advance_clock(day_start(d0 + 1, 0));
  y.ingest(fixture::app(day_start(d0 + 1, 0) + 7200, "y", "there"));
  y.advance_clock(day_start(d0 + 2, 0));
  const double disjoint = day_distance(snapshot_day(x, d0), snapshot_day(y, d0 + 1)).global;
  c.expect(disjoint == 1.0, "disjoint snapshots gave " + fmt(disjoint));

  // Every sequence up to length 8 against every sequence up to length 5.
  std::vector<std::vector<char>> seqs = {{}};
  for (std::size_t start = 0; start < seqs.size(); ++start) {
    if (seqs[start].size() == 8) continue;
    for (char ch : {'a', 'b', 'c'}) {
      auto s = seqs[start];
      s.push_back(ch);
      seqs.push_back(std::move(s));
    }
  }
  std::size_t pairs = 0, mismatches = 0;
  for (const auto& s : seqs) {
    for (const auto& t : seqs) {
      if (t.size() > 5) break;
      ++pairs;
      if (levenshtein<char>(s, t) != memo_levenshtein(s, t)) ++mismatches;
    }
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " levenshtein mismatches");
  c.note("identical 0, disjoint 1, " + std::to_string(pairs) + " edit-distance pairs agree");
  return c.result();
}

Outcome convergence_timing() {
  Check c;
  const auto& owner = default_simulation().owner;
  c.expect(owner.converged_day.has_value(), "never converged");
  if (owner.converged_day) {
    const std::int64_t first = local_day(default_scenario().persona.start_ts, 0);
    const std::int64_t days = *owner.converged_day - first + 1;
    c.expect(days >= 3 && days <= 14, "converged after " + std::to_string(days) + " days");
    c.note("converged after " + std::to_string(days) + " days");
  }
  return c.result();
}

Outcome threshold_semantics() {
  Check c;
  const auto& owner = default_simulation().owner;
  std::size_t n = 0, ch = 0;
  for (const auto& d : owner.decisions) {
    if (d.phase != Phase::deployed) continue;
    ++n;
    ch += d.decision == Decision::challenge;
  }
  c.expect(n > 0, "no deployed windows");
  const double rate = n ? static_cast<double>(ch) / static_cast<double>(n) : 0.0;
  c.expect(rate >= 0.005 && rate <= 0.05, "challenge fraction " + fmt(rate));
  c.note("challenge fraction " + fmt(100 * rate) + "% over " + std::to_string(n) + " windows");
  return c.result();
}

Outcome attack_ordering() {
  Check c;
  const auto& attacks = default_simulation().attacks;
  c.expect(attacks.size() == 4, "expected four attacks");
  if (attacks.size() != 4) return c.result();
  std::string line;
  for (std::size_t i = 0; i < 4; ++i) {
    c.expect(attacks[i].name == to_string(all_attack_kinds()[i]), "unexpected order " + attacks[i].name);
    line += attacks[i].name + " " + fmt(attacks[i].mean_comfort) + "/" + fmt(attacks[i].detection_rate) +
            (i < 3 ? ", " : "");
    if (i == 0) continue;
    c.expect(attacks[i].mean_comfort > attacks[i - 1].mean_comfort, "comfort not increasing at " + attacks[i].name);
    c.expect(attacks[i].detection_rate < attacks[i - 1].detection_rate,
             "detection not decreasing at " + attacks[i].name);
  }
  c.expect(attacks[0].detection_rate >= 0.95, "uninformed outsider detection " + fmt(attacks[0].detection_rate));
  c.note(line);
  return c.result();
}

Outcome drift_retraining() {
  Check c;
  const auto& drift = default_simulation().drift;
  const auto scenario = default_scenario();
  const std::int64_t move = local_day(scenario.persona.start_ts, 0) + scenario.drift->move_day;
  std::map<DriftStrategy, const DriftCaseResult*> by;
  for (const auto& d : drift) by[d.strategy] = &d;
  c.expect(by.size() == 3, "missing drift strategies");
  if (by.size() != 3) return c.result();

  auto post = [&](const DriftCaseResult& r) {
    std::vector<double> means;
    for (const auto& d : r.days) {
      if (d.day >= move) means.push_back(d.mean);
    }
    return means;
  };
  const auto none = post(*by[DriftStrategy::none]);
  const double pre_none = by[DriftStrategy::none]->pre_move_mean;
  for (std::size_t i = 0; i < none.size(); ++i) {
    c.expect(none[i] <= pre_none - 0.2, "none day +" + std::to_string(i) + " mean " + fmt(none[i]));
  }
  auto first3 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3 && i < v.size(); ++i) s += v[i];
    return s / 3.0;
  };
  std::string line = "pre " + fmt(pre_none) + ", none max " +
                     fmt(none.empty() ? 0.0 : *std::max_element(none.begin(), none.end()));
  for (auto strat : {DriftStrategy::update, DriftStrategy::fresh}) {
    const auto means = post(*by[strat]);
    const double pre = by[strat]->pre_move_mean;
    int recovered_on = -1;
    for (std::size_t i = 0; i < 7 && i < means.size(); ++i) {
      if (means[i] >= 0.8 * pre) {
        recovered_on = static_cast<int>(i);
        break;
      }
    }
    c.expect(recovered_on >= 0, std::string(to_string(strat)) + " did not recover within 7 days");
    line += ", " + std::string(to_string(strat)) + " recovers day +" + std::to_string(recovered_on) +
            " first3 " + fmt(first3(means));
  }
  const double up = first3(post(*by[DriftStrategy::update]));
  const double fr = first3(post(*by[DriftStrategy::fresh]));
  c.expect(up >= fr, "update first3 " + fmt(up) + " < fresh " + fmt(fr));
  c.expect(none.size() >= 7, "too few post-move days");
  c.note(line);
  return c.result();
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    out[entry.path().filename().string()] = buf.str();
  }
  return out;
}

Outcome determinism() {
  Check c;
  const fs::path root = fs::temp_directory_path() / ("implauth_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"run1", "run2"}) {
    const fs::path dir = root / name;
    const std::string cmd = std::string("\"") + IMPLAUTH_CLI_PATH + "\" simulate -o \"" + dir.string() +
                            "\" --set seed=42 > \"" + (root / name).string() + ".log\" 2>&1";
    const int rc = std::system(cmd.c_str());
    c.expect(rc == 0, std::string("simulate exited with ") + std::to_string(rc));
    if (rc == 0) runs.push_back(csv_files(dir));
  }
  if (runs.size() == 2) {
    c.expect(!runs[0].empty(), "no CSV output");
    c.expect(runs[0].size() == runs[1].size(), "different file sets");
    for (const auto& [file, bytes] : runs[0]) {
      auto it = runs[1].find(file);
      c.expect(it != runs[1].end() && it->second == bytes, file + " differs");
    }
    c.note(std::to_string(runs[0].size()) + " CSV files byte-identical");
  }
  fs::remove_all(root);
  return c.result();
}

Outcome performance() {
  Check c;
  auto spec = default_persona();
  spec.duration_days = 1;
  std::vector<SensorEvent> events;
  while (events.size() < 1000000) {
    auto more = generate_persona(spec);
    events.insert(events.end(), more.begin(), more.end());
    spec.start_ts += kSecondsPerDay;
    spec.seed += 1;
  }
  events.resize(1000000);
  auto timed = [&](std::size_t n) {
    double best = 1e300;
    for (int rep = 0; rep < 5; ++rep) {
      Profile p("owner");
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < n; ++i) p.ingest(events[i]);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double small = timed(400000);
  const double large = timed(1000000);
  const double ratio = large / small;
  c.expect(ratio <= 2.5, "time ratio " + fmt(ratio));
  c.note(fmt(large) + " s for 1e6 vs " + fmt(small) + " s for 4e5, ratio " + fmt(ratio));
  return c.result();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"equation fidelity", equation_fidelity},
      {"density correctness", density_correctness},
      {"stability metrics", stability_metrics},
      {"convergence timing", convergence_timing},
      {"threshold semantics", threshold_semantics},
      {"attack ordering", attack_ordering},
      {"drift and retraining", drift_retraining},
      {"determinism", determinism},
      {"linear ingest", performance},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.ok ? 0 : 1;
    std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first
              << " (" << o.detail << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
