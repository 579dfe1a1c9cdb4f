#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "implauth/lifecycle.hpp"

namespace implauth {

/// Per-day roll-up of a decision log, the plot data behind threshold-over-time figures.
struct DecisionDay {
  std::int64_t day = 0;
  std::size_t windows = 0;
  std::size_t challenges = 0;
  double challenge_rate = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double p2 = 0.0;  // nearest-rank 2nd percentile of the aggregates
  double threshold = 0.0;  // last threshold in force that day
};

/// Reads `window_start,aggregate,threshold,decision,phase`. Throws CorruptDocument.
std::vector<DecisionRecord> read_decisions_csv(std::istream& in);

std::vector<DecisionDay> aggregate_decisions(std::span<const DecisionRecord> decisions,
                                             std::int64_t utc_offset_seconds = 0);

void write_decision_days_csv(std::ostream& out, std::span<const DecisionDay> days);

}  // namespace implauth
