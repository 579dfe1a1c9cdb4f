#include "implauth/report.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "implauth/errors.hpp"

namespace implauth {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw CorruptDocument("line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<DecisionRecord> read_decisions_csv(std::istream& in) {
  std::vector<DecisionRecord> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "window_start,aggregate,threshold,decision,phase") {
    throw CorruptDocument("unexpected decision log header");
  }
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) throw CorruptDocument("line " + std::to_string(n) + ": expected 5 fields");
    DecisionRecord d;
    d.window_start = parse_number<Timestamp>(f[0], n);
    d.aggregate = parse_number<double>(f[1], n);
    d.threshold = parse_number<double>(f[2], n);
    if (f[3] == "challenge") {
      d.decision = Decision::challenge;
    } else if (f[3] == "comfortable") {
      d.decision = Decision::comfortable;
    } else {
      throw CorruptDocument("line " + std::to_string(n) + ": unknown decision '" + f[3] + "'");
    }
    d.phase = parse_phase(f[4]);
    out.push_back(d);
  }
  return out;
}

std::vector<DecisionDay> aggregate_decisions(std::span<const DecisionRecord> decisions,
                                             std::int64_t utc_offset_seconds) {
  std::vector<DecisionDay> out;
  std::size_t lo = 0;
  while (lo < decisions.size()) {
    const auto day = local_day(decisions[lo].window_start, utc_offset_seconds);
    std::size_t hi = lo;
    std::vector<double> values;
    DecisionDay d;
    d.day = day;
    while (hi < decisions.size() && local_day(decisions[hi].window_start, utc_offset_seconds) == day) {
      const auto& r = decisions[hi++];
      values.push_back(r.aggregate);
      if (r.decision == Decision::challenge) ++d.challenges;
      d.threshold = r.threshold;
    }
    d.windows = values.size();
    d.challenge_rate = static_cast<double>(d.challenges) / static_cast<double>(d.windows);
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / static_cast<double>(d.windows);
    d.min = *std::min_element(values.begin(), values.end());
    d.p2 = nearest_rank(values, 2.0);
    out.push_back(d);
    lo = hi;
  }
  return out;
}

void write_decision_days_csv(std::ostream& out, std::span<const DecisionDay> days) {
  out << "day,windows,challenges,challenge_rate,mean,min,p2,threshold\n";
  for (const auto& d : days) {
    out << d.day << ',' << d.windows << ',' << d.challenges << ',' << format_real(d.challenge_rate) << ','
        << format_real(d.mean) << ',' << format_real(d.min) << ',' << format_real(d.p2) << ','
        << format_real(d.threshold) << '\n';
  }
}

}  // namespace implauth
