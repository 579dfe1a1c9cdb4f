// Serial vs OpenMP kernels: window scoring over a frozen snapshot and the
// direct KDE kernel sum.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "implauth/kernels.hpp"
#include "implauth/persona.hpp"

using namespace implauth;

namespace {

struct Fixture {
  Profile profile;
  std::vector<SensorEvent> day;
  std::vector<WindowSlice> windows;
  ComfortConfig config;

  Fixture() {
    auto spec = default_persona();
    spec.duration_days = 8;
    const auto events = generate_persona(spec);
    const Timestamp cut = spec.start_ts + 7 * kSecondsPerDay;
    for (const auto& e : events) {
      if (e.timestamp < cut) {
        profile.ingest(e);
      } else {
        day.push_back(e);
      }
    }
    windows = plan_windows(day, cut, cut + kSecondsPerDay, config.window_seconds);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_ScoreWindowsSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto out = score_windows_serial(f.profile, f.day, f.windows, f.config);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.windows.size()));
}
BENCHMARK(BM_ScoreWindowsSerial)->Unit(benchmark::kMillisecond);

void BM_ScoreWindowsParallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto out = score_windows_parallel(f.profile, f.day, f.windows, f.config, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.windows.size()));
}
BENCHMARK(BM_ScoreWindowsParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

std::pair<std::vector<double>, std::vector<double>> kde_inputs(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> xs(n), hs(n, 0.2);
  for (auto& x : xs) x = dist(rng);
  return {xs, hs};
}

void BM_KernelSumSerial(benchmark::State& state) {
  const auto [xs, hs] = kde_inputs(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(256);
  for (auto _ : state) {
    kernel_sum_serial(xs, hs, -5.0, 5.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_KernelSumSerial)->Arg(1 << 12)->Arg(1 << 16);

void BM_KernelSumParallel(benchmark::State& state) {
  const auto [xs, hs] = kde_inputs(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(256);
  for (auto _ : state) {
    kernel_sum_parallel(xs, hs, -5.0, 5.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_KernelSumParallel)->Arg(1 << 12)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();
