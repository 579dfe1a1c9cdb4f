#include "implauth/stability.hpp"

#include <cmath>
#include <string>

#include "implauth/errors.hpp"

namespace implauth {

double discrete_distance(const DiscreteDensity& prev, const DiscreteDensity& curr,
                         std::size_t top_k) {
  const auto a = prev.ranked_labels(top_k);
  const auto b = curr.ranked_labels(top_k);
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  const auto edits = levenshtein<std::string>(a, b);
  return static_cast<double>(edits) / static_cast<double>(longest);
}

double continuous_distance(const ContinuousDensity& prev, const ContinuousDensity& curr,
                           const StabilityConfig& config) {
  if (prev.empty() && curr.empty()) return 0.0;
  if (prev.empty() || curr.empty()) return 1.0;
  const auto a = prev.percentiles(config.percentiles);
  const auto b = curr.percentiles(config.percentiles);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  const double range = std::max(prev.grid_max(), curr.grid_max()) -
                       std::min(prev.grid_min(), curr.grid_min());
  if (!(range > 0.0)) return 0.0;
  return std::clamp(std::sqrt(sq) / (config.continuous_scale * range), 0.0, 1.0);
}

double density_distance(const SensorDensity& prev, const SensorDensity& curr,
                        const StabilityConfig& config) {
  if (prev.index() != curr.index()) return 1.0;
  if (const auto* d = std::get_if<DiscreteDensity>(&prev)) {
    return discrete_distance(*d, std::get<DiscreteDensity>(curr), config.top_k);
  }
  return continuous_distance(std::get<ContinuousDensity>(prev), std::get<ContinuousDensity>(curr),
                             config);
}

namespace {

void compare_anchor(const Anchor& anchor, const AnchorModel* prev, const AnchorModel* curr,
                    const StabilityConfig& config, std::map<DistanceKey, double>& out) {
  static const AnchorModel kEmpty;
  const AnchorModel& p = prev != nullptr ? *prev : kEmpty;
  const AnchorModel& c = curr != nullptr ? *curr : kEmpty;
  for (const auto& [sensor, density] : p.densities()) {
    const SensorDensity* other = c.find(sensor);
    out[{anchor, sensor}] = other != nullptr ? density_distance(density, *other, config) : 1.0;
  }
  for (const auto& [sensor, density] : c.densities()) {
    if (p.find(sensor) == nullptr) out[{anchor, sensor}] = 1.0;
  }
}

}  // namespace

DayDistance day_distance(const ProfileSnapshot& prev, const ProfileSnapshot& curr,
                         const StabilityConfig& config) {
  if (curr.day_index != prev.day_index + 1) {
    throw NonConsecutiveDays("snapshots for days " + std::to_string(prev.day_index) + " and " +
                             std::to_string(curr.day_index));
  }
  DayDistance d;
  d.day_index = curr.day_index;
  for (int h = 0; h < 24; ++h) {
    compare_anchor(Anchor::time(h), &prev->temporal(h), &curr->temporal(h), config, d.per_sensor);
  }
  for (const auto& [label, model] : prev->spatial_models()) {
    compare_anchor(Anchor::place(label), &model, curr->spatial(label), config, d.per_sensor);
  }
  for (const auto& [label, model] : curr->spatial_models()) {
    if (prev->spatial(label) == nullptr) {
      compare_anchor(Anchor::place(label), nullptr, &model, config, d.per_sensor);
    }
  }
  double sums[2] = {0.0, 0.0};
  std::size_t counts[2] = {0, 0};
  for (const auto& [key, v] : d.per_sensor) {
    const auto m = static_cast<std::size_t>(key.anchor.kind);
    sums[m] += v;
    ++counts[m];
  }
  d.temporal = counts[0] ? sums[0] / static_cast<double>(counts[0]) : 0.0;
  d.spatial = counts[1] ? sums[1] / static_cast<double>(counts[1]) : 0.0;
  d.global = (d.temporal + d.spatial) / 2.0;
  return d;
}

bool is_converged(std::span<const DayDistance> history, double threshold, int consecutive) {
  if (consecutive <= 0) return true;
  if (history.size() < static_cast<std::size_t>(consecutive)) return false;
  return std::all_of(history.end() - consecutive, history.end(),
                     [&](const DayDistance& d) { return d.global < threshold; });
}

}  // namespace implauth
