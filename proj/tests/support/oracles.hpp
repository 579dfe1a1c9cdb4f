#pragma once

// Independent reference computations. Deliberately naive: brute force over raw
// samples, full sorts and plain recursion, sharing no code with the engine.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "implauth/events.hpp"

namespace oracle {

inline std::map<std::string, std::uint64_t> batch_counts(const std::vector<std::string>& items) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& s : items) ++out[s];
  return out;
}

/// Unmemoized recurrence; only for short sequences.
template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b, std::size_t i = 0,
                        std::size_t j = 0) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return levenshtein(a, b, i + 1, j + 1);
  return 1 + std::min({levenshtein(a, b, i + 1, j), levenshtein(a, b, i, j + 1),
                       levenshtein(a, b, i + 1, j + 1)});
}

/// Value at 1-based rank ceil(p/100 * N) of the fully sorted sample.
inline double nearest_rank(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  if (rank < 1) rank = 1;
  return v[rank - 1];
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// (1/n) * sum_i phi((x - x_i) / h_i) / h_i.
inline double kernel_sum(const std::vector<double>& xs, const std::vector<double>& hs, double x) {
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double z = (x - xs[i]) / hs[i];
    s += inv_sqrt_2pi * std::exp(-0.5 * z * z) / hs[i];
  }
  return s / static_cast<double>(xs.size());
}

inline double trapezoid(const std::vector<double>& ys, double dx) {
  double s = 0.0;
  for (std::size_t i = 1; i < ys.size(); ++i) s += 0.5 * (ys[i - 1] + ys[i]) * dx;
  return s;
}

/// Count of events of `sensor` whose local hour is `hour`, by scanning the stream.
inline std::uint64_t count_at_hour(const std::vector<implauth::SensorEvent>& events,
                                   implauth::SensorKind sensor, int hour, std::int64_t offset = 0) {
  std::uint64_t n = 0;
  for (const auto& e : events) {
    const auto local = e.timestamp + offset;
    const int h = static_cast<int>(((local % 86400) + 86400) % 86400 / 3600);
    if (e.sensor == sensor && h == hour) ++n;
  }
  return n;
}

}  // namespace oracle
