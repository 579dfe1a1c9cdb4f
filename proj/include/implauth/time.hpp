#pragma once

#include <cstdint>

namespace implauth {

/// Seconds since the Unix epoch.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerHour = 3600;

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

/// Local calendar day index for a UTC offset in seconds.
constexpr std::int64_t local_day(Timestamp ts, std::int64_t utc_offset) {
  return floor_div(ts + utc_offset, kSecondsPerDay);
}

/// Local hour of day, 0..23.
constexpr int local_hour(Timestamp ts, std::int64_t utc_offset) {
  const std::int64_t local = ts + utc_offset;
  return static_cast<int>((local - floor_div(local, kSecondsPerDay) * kSecondsPerDay) / kSecondsPerHour);
}

/// UTC timestamp of local midnight starting `day`.
constexpr Timestamp day_start(std::int64_t day, std::int64_t utc_offset) {
  return day * kSecondsPerDay - utc_offset;
}

/// Day of week, Monday = 0. Day 0 of the epoch was a Thursday.
constexpr int weekday(std::int64_t day) {
  const std::int64_t r = (day + 3) % 7;
  return static_cast<int>(r < 0 ? r + 7 : r);
}

constexpr bool is_weekend(std::int64_t day) { return weekday(day) >= 5; }

/// Start of the tumbling window containing `ts`.
constexpr Timestamp window_floor(Timestamp ts, std::int64_t window_seconds) {
  return floor_div(ts, window_seconds) * window_seconds;
}

}  // namespace implauth
