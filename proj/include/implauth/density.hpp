#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace implauth {

/// Occurrence-count histogram over discrete labels.
class DiscreteDensity {
 public:
  using Counts = std::unordered_map<std::string, std::uint64_t>;

  void observe(std::string_view item);

  /// count(item) / max_count, so the modal item scores exactly 1 and unseen items 0.
  double score(std::string_view item) const;
  double probability(std::string_view item) const;

  std::uint64_t count(std::string_view item) const;
  std::uint64_t total() const { return total_; }
  std::uint64_t max_count() const { return max_count_; }
  bool empty() const { return total_ == 0; }
  const Counts& counts() const { return counts_; }

  /// Labels by descending count, ties lexicographic, truncated to `top_k`.
  std::vector<std::string> ranked_labels(std::size_t top_k) const;

  /// Rebuilds from stored counts; derived totals are recomputed.
  static DiscreteDensity from_counts(Counts counts);

  bool operator==(const DiscreteDensity&) const = default;

 private:
  Counts counts_;
  std::uint64_t total_ = 0;
  std::uint64_t max_count_ = 0;
};

struct DensityConfig {
  int bins = 256;
  /// When set, every kernel uses this bandwidth instead of Silverman's rule.
  std::optional<double> fixed_bandwidth;
  double bandwidth_floor_fraction = 1e-6;  // of the grid span
  double kernel_support = 8.0;             // kernel truncated beyond this many bandwidths
  double initial_half_span = 1.0;

  bool operator==(const DensityConfig&) const = default;
};

/// Gaussian kernel density estimate accumulated onto a fixed evaluation grid.
///
/// Each observation deposits one unit of probability mass: the sampled kernel
/// is rescaled so its trapezoidal integral over the grid is exactly 1, which
/// keeps the density normalized even when the kernel is narrower than a grid
/// step or clipped by the grid edge. Kernels narrower than one grid step fall
/// back to linear binning. An observation outside the grid doubles the span
/// (repeatedly if needed) and rebins the accumulated mass before depositing.
class ContinuousDensity {
 public:
  explicit ContinuousDensity(DensityConfig config = {});
  /// Starts with an explicit grid instead of one centred on the first sample.
  ContinuousDensity(DensityConfig config, double grid_min, double grid_max);

  /// Throws NonFiniteInput.
  void observe(double x);

  /// Normalized density at x by linear interpolation; 0 outside the grid or when empty.
  double density_at(double x) const;
  /// density_at(x) / peak density, in [0, 1].
  double score(double x) const;
  /// Values at the given percentiles (each in (0,100)) via the trapezoidal grid CDF.
  /// Throws EmptyDensity when nothing has been observed.
  std::vector<double> percentiles(std::span<const double> ps) const;
  /// Trapezoidal integral of the normalized density over the grid.
  double integral() const;

  std::uint64_t count() const { return n_; }
  bool empty() const { return n_ == 0; }
  bool has_grid() const { return !mass_.empty(); }
  double grid_min() const { return grid_min_; }
  double grid_max() const { return grid_max_; }
  int bins() const { return config_.bins; }
  double step() const;
  double grid_point(int i) const;
  double mean() const { return mean_; }
  double variance() const;
  double bandwidth() const { return bandwidth_; }
  /// Accumulated, unnormalized mass per grid point; density = mass / count.
  std::span<const double> mass() const { return mass_; }
  const DensityConfig& config() const { return config_; }
  double peak_mass() const { return peak_; }

  /// Bandwidth the next observation would use given the current statistics.
  double next_bandwidth() const;

  struct Stored {
    DensityConfig config;
    double grid_min = 0.0;
    double grid_max = 0.0;
    std::vector<double> mass;
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double bandwidth = 0.0;
  };
  Stored store() const;
  /// Throws CorruptDocument when the stored fields violate the grid invariants.
  static ContinuousDensity restore(Stored stored);

  bool operator==(const ContinuousDensity&) const = default;

 private:
  void init_grid(double lo, double hi);
  void expand_to_cover(double x);
  void deposit(double x, double h);
  void refresh_peak();

  DensityConfig config_;
  double grid_min_ = 0.0;
  double grid_max_ = 0.0;
  std::vector<double> mass_;
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double bandwidth_ = 0.0;
  double peak_ = 0.0;
};

/// Silverman's rule of thumb, 1.06 * sigma * n^(-1/5).
double silverman_bandwidth(double stddev, std::uint64_t n);

}  // namespace implauth
