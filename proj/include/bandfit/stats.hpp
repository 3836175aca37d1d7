#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandfit/core_math.hpp"
#include "bandfit/fitting.hpp"

namespace bandfit {

/// Linear-interpolation percentile over (n - 1) ranks, p in [0, 100].
/// Throws EmptyDataError on empty input.
double percentile(std::span<const double> values, double p);

/// Box-plot statistics: whiskers at the 5th/95th percentiles.
struct BoxStats {
  double p5 = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double p95 = 0.0;

  friend bool operator==(const BoxStats&, const BoxStats&) = default;
};

struct LayerSummary {
  std::string layer_name;
  std::size_t count = 0;
  std::size_t degenerate_count = 0;
  /// Absent when every fit in the layer is degenerate.
  std::optional<BoxStats> stats;
};

BoxStats box_stats(std::span<const double> values);

/// Statistics over the non-degenerate residuals of one layer's fits.
LayerSummary layer_summary(std::span<const FitResult> fits, const std::string& layer_name);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;
};

/// Counts per half-open bin [e_i, e_{i+1}); values below the first edge go to
/// underflow, values at or above the last edge to overflow.
Histogram histogram(std::span<const double> values, std::span<const double> edges);

/// `bins` log-spaced bins over [lo, hi].
std::vector<double> log_bin_edges(double lo, double hi, std::size_t bins);

/// Default residual binning: 50 log-spaced bins over [1e-6, 1].
std::vector<double> default_residual_edges(std::size_t bins = 50);

struct CalibrationPoint {
  double noise_fraction = 0.0;
  double mean_rms = 0.0;
  std::size_t trials = 0;
};

/// Normalized value range of a unit-peak kernel.
inline constexpr double kNormalizedRange = 2.0;

/// For each noise fraction a, corrupts the unit-peak gabor_kernel(k, truth)
/// with i.i.d. uniform noise on [-a*R, a*R] and averages the RMS difference to
/// the clean kernel over `trials` draws. Every fraction reuses the same draws
/// (scaled), so the curve is deterministic in `seed` and monotone in a.
std::vector<CalibrationPoint> calibration_curve(std::size_t k, const GaborParams& truth,
                                                std::span<const double> noise_fractions,
                                                std::size_t trials, std::uint64_t seed);

}  // namespace bandfit
