#include "implauth/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "implauth/errors.hpp"

namespace implauth {

// --- DiscreteDensity -------------------------------------------------------

void DiscreteDensity::observe(std::string_view item) {
  auto [it, inserted] = counts_.try_emplace(std::string(item), 0);
  ++it->second;
  ++total_;
  max_count_ = std::max(max_count_, it->second);
}

std::uint64_t DiscreteDensity::count(std::string_view item) const {
  auto it = counts_.find(std::string(item));
  return it == counts_.end() ? 0 : it->second;
}

double DiscreteDensity::score(std::string_view item) const {
  if (max_count_ == 0) return 0.0;
  return static_cast<double>(count(item)) / static_cast<double>(max_count_);
}

double DiscreteDensity::probability(std::string_view item) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(count(item)) / static_cast<double>(total_);
}

std::vector<std::string> DiscreteDensity::ranked_labels(std::size_t top_k) const {
  std::vector<std::pair<std::uint64_t, const std::string*>> ranked;
  ranked.reserve(counts_.size());
  for (const auto& [label, c] : counts_) ranked.emplace_back(c, &label);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : *a.second < *b.second;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (const auto& [c, label] : ranked) out.push_back(*label);
  return out;
}

DiscreteDensity DiscreteDensity::from_counts(Counts counts) {
  DiscreteDensity d;
  for (auto it = counts.begin(); it != counts.end();) {
    if (it->second == 0) {
      it = counts.erase(it);
      continue;
    }
    d.total_ += it->second;
    d.max_count_ = std::max(d.max_count_, it->second);
    ++it;
  }
  d.counts_ = std::move(counts);
  return d;
}

// --- ContinuousDensity -----------------------------------------------------

namespace {

// Trapezoid weight of grid point i out of m.
inline double trap_weight(int i, int m) { return (i == 0 || i == m - 1) ? 0.5 : 1.0; }

}  // namespace

double silverman_bandwidth(double stddev, std::uint64_t n) {
  if (n == 0) return 0.0;
  return 1.06 * stddev * std::pow(static_cast<double>(n), -0.2);
}

ContinuousDensity::ContinuousDensity(DensityConfig config) : config_(config) {
  if (config_.bins < 2) throw InvalidConfig("density needs at least 2 bins");
}

ContinuousDensity::ContinuousDensity(DensityConfig config, double grid_min, double grid_max)
    : ContinuousDensity(config) {
  if (!std::isfinite(grid_min) || !std::isfinite(grid_max) || !(grid_min < grid_max)) {
    throw InvalidConfig("grid bounds must be finite with min < max");
  }
  init_grid(grid_min, grid_max);
}

void ContinuousDensity::init_grid(double lo, double hi) {
  grid_min_ = lo;
  grid_max_ = hi;
  mass_.assign(static_cast<std::size_t>(config_.bins), 0.0);
  peak_ = 0.0;
}

double ContinuousDensity::step() const {
  return (grid_max_ - grid_min_) / static_cast<double>(config_.bins - 1);
}

double ContinuousDensity::grid_point(int i) const {
  // Pin the last point so the grid ends exactly at grid_max.
  return i == config_.bins - 1 ? grid_max_ : grid_min_ + step() * i;
}

double ContinuousDensity::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double ContinuousDensity::next_bandwidth() const {
  double h = config_.fixed_bandwidth ? *config_.fixed_bandwidth
                                     : silverman_bandwidth(std::sqrt(variance()), n_);
  if (has_grid()) h = std::max(h, config_.bandwidth_floor_fraction * (grid_max_ - grid_min_));
  return h;
}

void ContinuousDensity::observe(double x) {
  if (!std::isfinite(x)) throw NonFiniteInput("continuous observation must be finite");
  if (!has_grid()) {
    init_grid(x - config_.initial_half_span, x + config_.initial_half_span);
  } else if (x < grid_min_ || x > grid_max_) {
    expand_to_cover(x);
  }
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
  bandwidth_ = next_bandwidth();
  deposit(x, bandwidth_);
}

void ContinuousDensity::deposit(double x, double h) {
  const int m = config_.bins;
  const double dx = step();
  const double u = (x - grid_min_) / dx;

  auto linear_bin = [&] {
    int j = std::clamp(static_cast<int>(std::floor(u)), 0, m - 2);
    const double t = std::clamp(u - j, 0.0, 1.0);
    const double wj = 1.0 - t;
    const double wk = t;
    const double s = dx * (trap_weight(j, m) * wj + trap_weight(j + 1, m) * wk);
    mass_[j] += wj / s;
    mass_[j + 1] += wk / s;
    peak_ = std::max({peak_, mass_[j], mass_[j + 1]});
  };

  if (h < dx) {
    linear_bin();
    return;
  }

  const double reach = config_.kernel_support * h / dx;
  const int lo = std::max(0, static_cast<int>(std::ceil(u - reach)));
  const int hi = std::min(m - 1, static_cast<int>(std::floor(u + reach)));
  if (lo > hi) {
    linear_bin();
    return;
  }
  thread_local std::vector<double> weights;
  weights.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  double s = 0.0;
  for (int g = lo; g <= hi; ++g) {
    const double z = (grid_point(g) - x) / h;
    const double w = std::exp(-0.5 * z * z);
    weights[static_cast<std::size_t>(g - lo)] = w;
    s += trap_weight(g, m) * w;
  }
  s *= dx;
  if (!(s > 0.0)) {
    linear_bin();
    return;
  }
  for (int g = lo; g <= hi; ++g) {
    mass_[g] += weights[static_cast<std::size_t>(g - lo)] / s;
    peak_ = std::max(peak_, mass_[g]);
  }
}

void ContinuousDensity::expand_to_cover(double x) {
  double lo = grid_min_;
  double hi = grid_max_;
  while (x > hi) hi = lo + 2.0 * (hi - lo);
  while (x < lo) lo = hi - 2.0 * (hi - lo);

  const int m = config_.bins;
  const double old_dx = step();
  const double new_dx = (hi - lo) / static_cast<double>(m - 1);
  std::vector<double> point_mass(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k < m; ++k) {
    if (mass_[k] == 0.0) continue;
    const double amount = mass_[k] * old_dx * trap_weight(k, m);
    const double u = (grid_point(k) - lo) / new_dx;
    const int j = std::clamp(static_cast<int>(std::floor(u)), 0, m - 2);
    const double t = std::clamp(u - j, 0.0, 1.0);
    point_mass[j] += amount * (1.0 - t);
    point_mass[j + 1] += amount * t;
  }
  grid_min_ = lo;
  grid_max_ = hi;
  for (int j = 0; j < m; ++j) mass_[j] = point_mass[j] / (new_dx * trap_weight(j, m));
  refresh_peak();
}

void ContinuousDensity::refresh_peak() {
  peak_ = mass_.empty() ? 0.0 : *std::max_element(mass_.begin(), mass_.end());
}

double ContinuousDensity::density_at(double x) const {
  if (n_ == 0 || !has_grid() || !std::isfinite(x) || x < grid_min_ || x > grid_max_) return 0.0;
  const int m = config_.bins;
  const double u = (x - grid_min_) / step();
  const int j = std::clamp(static_cast<int>(std::floor(u)), 0, m - 2);
  const double t = std::clamp(u - j, 0.0, 1.0);
  return (mass_[j] * (1.0 - t) + mass_[j + 1] * t) / static_cast<double>(n_);
}

double ContinuousDensity::score(double x) const {
  if (!std::isfinite(x)) throw NonFiniteInput("score input must be finite");
  if (n_ == 0 || peak_ <= 0.0) return 0.0;
  return std::clamp(density_at(x) * static_cast<double>(n_) / peak_, 0.0, 1.0);
}

double ContinuousDensity::integral() const {
  if (n_ == 0) return 0.0;
  const int m = config_.bins;
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += trap_weight(i, m) * mass_[i];
  return s * step() / static_cast<double>(n_);
}

std::vector<double> ContinuousDensity::percentiles(std::span<const double> ps) const {
  if (n_ == 0) throw EmptyDensity("percentiles of an empty density");
  const int m = config_.bins;
  const double dx = step();
  std::vector<double> cdf(static_cast<std::size_t>(m), 0.0);
  for (int k = 1; k < m; ++k) cdf[k] = cdf[k - 1] + 0.5 * dx * (mass_[k - 1] + mass_[k]);
  const double total = cdf.back();
  std::vector<double> out;
  out.reserve(ps.size());
  for (double p : ps) {
    if (!(p > 0.0 && p < 100.0)) throw InvalidConfig("percentile must lie in (0, 100)");
    const double target = p / 100.0 * total;
    auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), target);
    if (it == cdf.end()) it = cdf.end() - 1;
    const int k = static_cast<int>(it - cdf.begin());
    const double rise = cdf[k] - cdf[k - 1];
    const double frac = rise > 0.0 ? std::clamp((target - cdf[k - 1]) / rise, 0.0, 1.0) : 1.0;
    out.push_back(grid_point(k - 1) + frac * dx);
  }
  return out;
}

ContinuousDensity::Stored ContinuousDensity::store() const {
  return {config_, grid_min_, grid_max_, mass_, n_, mean_, m2_, bandwidth_};
}

ContinuousDensity ContinuousDensity::restore(Stored s) {
  if (s.config.bins < 2) throw CorruptDocument("density with fewer than 2 bins");
  ContinuousDensity d(s.config);
  if (!s.mass.empty()) {
    if (s.mass.size() != static_cast<std::size_t>(s.config.bins)) {
      throw CorruptDocument("mass vector length does not match bins");
    }
    if (!std::isfinite(s.grid_min) || !std::isfinite(s.grid_max) || !(s.grid_min < s.grid_max)) {
      throw CorruptDocument("grid bounds invalid");
    }
    for (double v : s.mass) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw CorruptDocument("negative or non-finite mass");
    }
    d.grid_min_ = s.grid_min;
    d.grid_max_ = s.grid_max;
    d.mass_ = std::move(s.mass);
  } else if (s.n != 0) {
    throw CorruptDocument("observed density without a grid");
  }
  d.n_ = s.n;
  d.mean_ = s.mean;
  d.m2_ = s.m2;
  d.bandwidth_ = s.bandwidth;
  d.refresh_peak();
  return d;
}

}  // namespace implauth
