#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "implauth/density.hpp"
#include "implauth/profile.hpp"

namespace implauth {

struct StabilityConfig {
  std::size_t top_k = 50;
  double continuous_scale = 3.0;  // distance saturates at a shift of range / scale
  std::vector<double> percentiles = {10, 20, 30, 40, 50, 60, 70, 80, 90};
  double convergence_threshold = 0.1;
  int consecutive_days = 2;
  std::size_t min_events_per_day = 50;

  bool operator==(const StabilityConfig&) const = default;
};

/// Classic edit distance with unit insert/delete/substitute costs, O(|a||b|)
/// time and O(|b|) memory.
template <typename T>
std::size_t levenshtein(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

/// Normalized edit distance between frequency-ranked label sequences.
double discrete_distance(const DiscreteDensity& prev, const DiscreteDensity& curr,
                         std::size_t top_k = 50);

/// Euclidean distance between percentile vectors over (scale * union range), clamped to [0,1].
/// Both empty gives 0; exactly one empty gives 1.
double continuous_distance(const ContinuousDensity& prev, const ContinuousDensity& curr,
                           const StabilityConfig& config = {});

/// Distance between two densities of the same sensor; 1 when the variants differ.
double density_distance(const SensorDensity& prev, const SensorDensity& curr,
                        const StabilityConfig& config = {});

struct DistanceKey {
  Anchor anchor;
  SensorKind sensor = SensorKind::app;

  auto operator<=>(const DistanceKey&) const = default;
  bool operator==(const DistanceKey&) const = default;
};

struct DayDistance {
  std::int64_t day_index = 0;
  std::map<DistanceKey, double> per_sensor;
  double temporal = 0.0;
  double spatial = 0.0;
  double global = 0.0;
};

/// Compares consecutive day snapshots over the union of (anchor, sensor) keys;
/// a key on one side only scores 1. Throws NonConsecutiveDays.
DayDistance day_distance(const ProfileSnapshot& prev, const ProfileSnapshot& curr,
                         const StabilityConfig& config = {});

/// True iff the last `consecutive` entries all have global distance below `threshold`.
bool is_converged(std::span<const DayDistance> history, double threshold = 0.1,
                  int consecutive = 2);

}  // namespace implauth
