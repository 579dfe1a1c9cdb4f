#include "implauth/kernels.hpp"

#include <cmath>
#include <numbers>

#include <omp.h>

#include "implauth/errors.hpp"

namespace implauth {

std::vector<WindowSlice> plan_windows(std::span<const SensorEvent> events, Timestamp first_window,
                                      Timestamp end_window, std::int64_t window_seconds,
                                      std::optional<Timestamp> carried_prev) {
  if (window_seconds <= 0) throw InvalidConfig("window length must be positive");
  std::vector<WindowSlice> out;
  first_window = window_floor(first_window, window_seconds);
  if (end_window <= first_window) return out;
  out.reserve(static_cast<std::size_t>((end_window - first_window + window_seconds - 1) / window_seconds));

  std::size_t i = 0;
  std::optional<Timestamp> prev = carried_prev;
  while (i < events.size() && events[i].timestamp < first_window) prev = events[i++].timestamp;

  for (Timestamp w = first_window; w < end_window; w += window_seconds) {
    WindowSlice slice{w, i, i, prev};
    while (i < events.size() && events[i].timestamp < w + window_seconds) ++i;
    slice.end = i;
    if (slice.end > slice.begin) prev = events[slice.end - 1].timestamp;
    out.push_back(slice);
  }
  return out;
}

std::vector<ComfortSample> score_windows_serial(const Profile& snapshot,
                                                std::span<const SensorEvent> events,
                                                std::span<const WindowSlice> windows,
                                                const ComfortConfig& config) {
  std::vector<ComfortSample> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    out.push_back(score_window(snapshot, w.window_start, events.subspan(w.begin, w.end - w.begin),
                               w.prev_event_ts, config));
  }
  return out;
}

std::vector<ComfortSample> score_windows_parallel(const Profile& snapshot,
                                                  std::span<const SensorEvent> events,
                                                  std::span<const WindowSlice> windows,
                                                  const ComfortConfig& config, int threads) {
  std::vector<ComfortSample> out(windows.size());
  const auto n = static_cast<std::ptrdiff_t>(windows.size());
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 32) num_threads(team)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& w = windows[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = score_window(
        snapshot, w.window_start, events.subspan(w.begin, w.end - w.begin), w.prev_event_ts, config);
  }
  return out;
}

std::vector<ComfortSample> score_windows(const Profile& snapshot, std::span<const SensorEvent> events,
                                         std::span<const WindowSlice> windows,
                                         const ComfortConfig& config, ExecPolicy policy, int threads) {
  if (policy == ExecPolicy::serial) return score_windows_serial(snapshot, events, windows, config);
  return score_windows_parallel(snapshot, events, windows, config, threads);
}

namespace {

inline double kernel_at(double grid_x, std::span<const double> samples,
                        std::span<const double> bandwidths) {
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double z = (grid_x - samples[i]) / bandwidths[i];
    sum += inv_sqrt_2pi * std::exp(-0.5 * z * z) / bandwidths[i];
  }
  return sum / static_cast<double>(samples.size());
}

void check_kernel_args(std::span<const double> samples, std::span<const double> bandwidths,
                       std::span<double> out) {
  if (samples.size() != bandwidths.size()) throw InvalidConfig("one bandwidth per sample required");
  if (samples.empty()) throw EmptyDensity("kernel sum over no samples");
  if (out.size() < 2) throw InvalidConfig("grid needs at least 2 points");
}

}  // namespace

void kernel_sum_serial(std::span<const double> samples, std::span<const double> bandwidths,
                       double grid_min, double grid_max, std::span<double> out) {
  check_kernel_args(samples, bandwidths, out);
  const double dx = (grid_max - grid_min) / static_cast<double>(out.size() - 1);
  for (std::size_t g = 0; g < out.size(); ++g) {
    const double x = g + 1 == out.size() ? grid_max : grid_min + dx * static_cast<double>(g);
    out[g] = kernel_at(x, samples, bandwidths);
  }
}

void kernel_sum_parallel(std::span<const double> samples, std::span<const double> bandwidths,
                         double grid_min, double grid_max, std::span<double> out, int threads) {
  check_kernel_args(samples, bandwidths, out);
  const double dx = (grid_max - grid_min) / static_cast<double>(out.size() - 1);
  const auto m = static_cast<std::ptrdiff_t>(out.size());
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
  for (std::ptrdiff_t g = 0; g < m; ++g) {
    const double x = g + 1 == m ? grid_max : grid_min + dx * static_cast<double>(g);
    out[static_cast<std::size_t>(g)] = kernel_at(x, samples, bandwidths);
  }
}

}  // namespace implauth
