#include "implauth/events.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "implauth/errors.hpp"

namespace implauth {
namespace {

constexpr std::array<SensorKind, kSensorKindCount> kAllKinds = {
    SensorKind::app,      SensorKind::wifi,     SensorKind::cell,     SensorKind::light,
    SensorKind::noise,    SensorKind::cpu,      SensorKind::call,     SensorKind::bluetooth,
    SensorKind::battery,  SensorKind::magnetic, SensorKind::rotation, SensorKind::device_active,
    SensorKind::charge,
};

constexpr std::array<std::string_view, kSensorKindCount> kKindNames = {
    "app",     "wifi",     "cell",     "light",         "noise",  "cpu",   "call",
    "bluetooth", "battery", "magnetic", "rotation", "device_active", "charge",
};

constexpr std::string_view kCsvHeader = "timestamp,user_id,sensor,value,location_id";

// Splits one CSV line, honouring double-quoted fields. Returns nullopt on an
// unterminated quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_csv(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || value < 0) return std::nullopt;
  return value;
}

std::optional<double> parse_real(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

struct RecordFields {
  std::string_view timestamp;
  std::string_view user_id;
  std::string_view sensor;
  std::string_view value;
  std::string_view location;
};

// Builds an event from textual fields; on failure fills `reason`.
std::optional<SensorEvent> build_event(const RecordFields& f, std::string& reason) {
  SensorEvent e;
  auto ts = parse_timestamp(f.timestamp);
  if (!ts) {
    reason = "bad timestamp '" + std::string(f.timestamp) + "'";
    return std::nullopt;
  }
  e.timestamp = *ts;
  if (f.user_id.empty()) {
    reason = "empty user_id";
    return std::nullopt;
  }
  e.user_id = std::string(f.user_id);
  auto kind = parse_sensor_kind(f.sensor);
  if (!kind) {
    reason = "unknown sensor '" + std::string(f.sensor) + "'";
    return std::nullopt;
  }
  e.sensor = *kind;
  if (is_discrete(*kind)) {
    if (f.value.empty()) {
      reason = "empty label";
      return std::nullopt;
    }
    e.value = std::string(f.value);
  } else {
    auto x = parse_real(f.value);
    if (!x) {
      reason = "bad scalar '" + std::string(f.value) + "'";
      return std::nullopt;
    }
    e.value = *x;
  }
  e.location_id = f.location.empty() ? std::string(kUnknownLocation) : std::string(f.location);
  return e;
}

class StreamAccumulator {
 public:
  explicit StreamAccumulator(ParseResult& out) : out_(out) {}

  void accept(SensorEvent e, std::size_t line) {
    if (seen_ && e.timestamp < last_) throw NonMonotonicTimestamp(line, last_, e.timestamp);
    seen_ = true;
    last_ = e.timestamp;
    out_.events.push_back(std::move(e));
  }

  void reject(std::size_t line, std::string reason) {
    out_.rejected.push_back({line, std::move(reason)});
  }

 private:
  ParseResult& out_;
  bool seen_ = false;
  Timestamp last_ = 0;
};

void strip_line(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void parse_csv(std::istream& source, ParseResult& out) {
  StreamAccumulator acc(out);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(source, line)) {
    ++line_no;
    strip_line(line);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!header_seen) {
      if (line.empty()) continue;
      if (line != kCsvHeader) {
        throw UnsupportedFormat("CSV header must be '" + std::string(kCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (!fields) {
      acc.reject(line_no, "unterminated quote");
      continue;
    }
    if (fields->size() != 5) {
      acc.reject(line_no, "expected 5 fields, got " + std::to_string(fields->size()));
      continue;
    }
    const auto& v = *fields;
    std::string reason;
    auto e = build_event({v[0], v[1], v[2], v[3], v[4]}, reason);
    if (!e) {
      acc.reject(line_no, std::move(reason));
      continue;
    }
    acc.accept(std::move(*e), line_no);
  }
}

void parse_jsonl(std::istream& source, ParseResult& out) {
  using nlohmann::json;
  StreamAccumulator acc(out);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    strip_line(line);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      acc.reject(line_no, "not a JSON object");
      continue;
    }
    // Normalize every field to text so CSV and JSONL share one validator.
    std::array<std::string, 5> text;
    constexpr std::array<const char*, 5> keys = {"timestamp", "user_id", "sensor", "value",
                                                 "location_id"};
    bool ok = true;
    for (std::size_t i = 0; i < keys.size() && ok; ++i) {
      auto it = doc.find(keys[i]);
      if (it == doc.end()) {
        if (i == 4) continue;
        acc.reject(line_no, std::string("missing key '") + keys[i] + "'");
        ok = false;
      } else if (it->is_string()) {
        text[i] = it->get<std::string>();
      } else if (it->is_number_integer() || it->is_number_unsigned()) {
        text[i] = it->dump();
      } else if (it->is_number_float()) {
        text[i] = format_real(it->get<double>());
      } else {
        acc.reject(line_no, std::string("unsupported type for '") + keys[i] + "'");
        ok = false;
      }
    }
    if (!ok) continue;
    std::string reason;
    auto e = build_event({text[0], text[1], text[2], text[3], text[4]}, reason);
    if (!e) {
      acc.reject(line_no, std::move(reason));
      continue;
    }
    acc.accept(std::move(*e), line_no);
  }
}

std::string value_text(const SensorValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return format_real(std::get<double>(v));
}

}  // namespace

std::span<const SensorKind> all_sensor_kinds() { return kAllKinds; }

std::string_view to_string(SensorKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<SensorKind> parse_sensor_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return kAllKinds[i];
  }
  return std::nullopt;
}

StreamFormat parse_stream_format(std::string_view name) {
  if (name == "csv") return StreamFormat::csv;
  if (name == "jsonl") return StreamFormat::jsonl;
  throw UnsupportedFormat("unsupported stream format '" + std::string(name) + "'");
}

ParseResult parse_stream(std::istream& source, StreamFormat format) {
  ParseResult out;
  switch (format) {
    case StreamFormat::csv:
      parse_csv(source, out);
      break;
    case StreamFormat::jsonl:
      parse_jsonl(source, out);
      break;
  }
  return out;
}

void write_stream(std::ostream& sink, std::span<const SensorEvent> events, StreamFormat format) {
  if (format == StreamFormat::csv) {
    sink << kCsvHeader << '\n';
    for (const auto& e : events) {
      sink << e.timestamp << ',' << quote_csv(e.user_id) << ',' << to_string(e.sensor) << ','
           << quote_csv(value_text(e.value)) << ',' << quote_csv(e.location_id) << '\n';
    }
    return;
  }
  for (const auto& e : events) {
    nlohmann::ordered_json doc;
    doc["timestamp"] = e.timestamp;
    doc["user_id"] = e.user_id;
    doc["sensor"] = to_string(e.sensor);
    if (const auto* s = std::get_if<std::string>(&e.value)) {
      doc["value"] = *s;
    } else {
      doc["value"] = std::get<double>(e.value);
    }
    doc["location_id"] = e.location_id;
    sink << doc.dump() << '\n';
  }
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return std::to_string(value);
  return std::string(buf.data(), ptr);
}

}  // namespace implauth
