#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "implauth/comfort.hpp"
#include "implauth/density.hpp"

namespace implauth {

/// One tumbling window over a contiguous run of a sorted event stream.
struct WindowSlice {
  Timestamp window_start = 0;
  std::size_t begin = 0;  // [begin, end) into the event span
  std::size_t end = 0;
  std::optional<Timestamp> prev_event_ts;  // last event strictly before this window

  bool operator==(const WindowSlice&) const = default;
};

/// Partitions events into every window in [first_window, end_window), including
/// eventless ones. Events outside the range are ignored except to seed
/// `prev_event_ts`, which starts from `carried_prev`.
std::vector<WindowSlice> plan_windows(std::span<const SensorEvent> events, Timestamp first_window,
                                      Timestamp end_window, std::int64_t window_seconds,
                                      std::optional<Timestamp> carried_prev = std::nullopt);

enum class ExecPolicy { serial, parallel };

/// Reference implementation: one window after another.
std::vector<ComfortSample> score_windows_serial(const Profile& snapshot,
                                                std::span<const SensorEvent> events,
                                                std::span<const WindowSlice> windows,
                                                const ComfortConfig& config);

/// OpenMP data-parallel version; results are identical to the serial path.
std::vector<ComfortSample> score_windows_parallel(const Profile& snapshot,
                                                  std::span<const SensorEvent> events,
                                                  std::span<const WindowSlice> windows,
                                                  const ComfortConfig& config, int threads = 0);

std::vector<ComfortSample> score_windows(const Profile& snapshot, std::span<const SensorEvent> events,
                                         std::span<const WindowSlice> windows,
                                         const ComfortConfig& config, ExecPolicy policy,
                                         int threads = 0);

/// Direct kernel sum of a sample set at every grid point of `density`'s grid:
/// out[g] = sum_i phi((x_g - x_i) / h_i) / (h_i * n). Serial reference.
void kernel_sum_serial(std::span<const double> samples, std::span<const double> bandwidths,
                       double grid_min, double grid_max, std::span<double> out);

/// OpenMP version over grid points.
void kernel_sum_parallel(std::span<const double> samples, std::span<const double> bandwidths,
                         double grid_min, double grid_max, std::span<double> out, int threads = 0);

}  // namespace implauth
