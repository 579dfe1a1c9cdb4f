#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "implauth/time.hpp"

namespace implauth {

enum class SensorKind {
  app,
  wifi,
  cell,
  light,
  noise,
  cpu,
  call,
  bluetooth,
  battery,
  magnetic,
  rotation,
  device_active,
  charge,
};

inline constexpr std::size_t kSensorKindCount = 13;

/// All sensor kinds in declaration order.
std::span<const SensorKind> all_sensor_kinds();

std::string_view to_string(SensorKind kind);
std::optional<SensorKind> parse_sensor_kind(std::string_view name);

/// Discrete sensors carry labels; everything else carries a scalar.
constexpr bool is_discrete(SensorKind kind) {
  switch (kind) {
    case SensorKind::app:
    case SensorKind::wifi:
    case SensorKind::cell:
    case SensorKind::call:
    case SensorKind::bluetooth:
    case SensorKind::device_active:
      return true;
    default:
      return false;
  }
}

using SensorValue = std::variant<std::string, double>;

inline constexpr std::string_view kUnknownLocation = "unknown";

struct SensorEvent {
  Timestamp timestamp = 0;
  std::string user_id;
  SensorKind sensor = SensorKind::app;
  SensorValue value;
  std::string location_id{kUnknownLocation};

  bool operator==(const SensorEvent&) const = default;
};

enum class StreamFormat { csv, jsonl };

/// Throws UnsupportedFormat for anything other than "csv" or "jsonl".
StreamFormat parse_stream_format(std::string_view name);

struct MalformedRecord {
  std::size_t line = 0;
  std::string reason;
};

struct ParseResult {
  std::vector<SensorEvent> events;
  std::vector<MalformedRecord> rejected;

  std::size_t rejected_count() const { return rejected.size(); }
};

/// Parses a canonical event stream. Malformed records are skipped and tallied;
/// a timestamp that goes backwards aborts with NonMonotonicTimestamp.
ParseResult parse_stream(std::istream& source, StreamFormat format);

void write_stream(std::ostream& sink, std::span<const SensorEvent> events, StreamFormat format);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

}  // namespace implauth
