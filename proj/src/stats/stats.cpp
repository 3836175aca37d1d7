#include "bandfit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bandfit/error.hpp"

namespace bandfit {
namespace {

double sorted_percentile(const std::vector<double>& sorted, double p) {
  const double rank = static_cast<double>(sorted.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

void check_percent(double p) {
  if (!(p >= 0.0 && p <= 100.0)) {
    throw InvalidParameterError("percentile must lie in [0, 100], got " + std::to_string(p));
  }
}

}  // namespace

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw EmptyDataError("percentile of an empty list");
  check_percent(p);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_percentile(sorted, p);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw EmptyDataError("box statistics of an empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {sorted_percentile(sorted, 5.0), sorted_percentile(sorted, 25.0),
          sorted_percentile(sorted, 50.0), sorted_percentile(sorted, 75.0),
          sorted_percentile(sorted, 95.0)};
}

LayerSummary layer_summary(std::span<const FitResult> fits, const std::string& layer_name) {
  LayerSummary summary;
  summary.layer_name = layer_name;
  summary.count = fits.size();
  std::vector<double> residuals;
  residuals.reserve(fits.size());
  for (const FitResult& fit : fits) {
    if (fit.degenerate) {
      ++summary.degenerate_count;
    } else {
      residuals.push_back(fit.rms);
    }
  }
  if (!residuals.empty()) summary.stats = box_stats(residuals);
  return summary;
}

Histogram histogram(std::span<const double> values, std::span<const double> edges) {
  if (edges.size() < 2) throw InvalidParameterError("histogram needs at least two bin edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i]) || (i > 0 && !(edges[i] > edges[i - 1]))) {
      throw InvalidParameterError("histogram bin edges must be finite and strictly increasing");
    }
  }
  Histogram hist;
  hist.edges.assign(edges.begin(), edges.end());
  hist.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    if (v < edges.front()) {
      ++hist.underflow;
    } else if (!(v < edges.back())) {
      ++hist.overflow;
    } else {
      const auto upper = std::upper_bound(edges.begin(), edges.end(), v);
      ++hist.counts[static_cast<std::size_t>(upper - edges.begin()) - 1];
    }
  }
  return hist;
}

std::vector<double> log_bin_edges(double lo, double hi, std::size_t bins) {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi) || bins == 0) {
    throw InvalidParameterError("log bins need 0 < lo < hi and at least one bin");
  }
  std::vector<double> edges(bins + 1);
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = std::exp(log_lo + step * static_cast<double>(i));
  edges.front() = lo;
  edges.back() = hi;
  return edges;
}

std::vector<double> default_residual_edges(std::size_t bins) { return log_bin_edges(1e-6, 1.0, bins); }

std::vector<CalibrationPoint> calibration_curve(std::size_t k, const GaborParams& truth,
                                                std::span<const double> noise_fractions,
                                                std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw InvalidParameterError("calibration needs at least one trial");
  for (std::size_t i = 0; i < noise_fractions.size(); ++i) {
    const double a = noise_fractions[i];
    if (!std::isfinite(a) || a < 0.0 || (i > 0 && !(a > noise_fractions[i - 1]))) {
      throw InvalidParameterError("noise fractions must be non-negative and strictly increasing");
    }
  }
  const NormalizedKernel clean = normalize_kernel(gabor_kernel(k, truth));
  if (clean.degenerate) throw InvalidParameterError("calibration kernel is flat");
  const auto values = clean.kernel.values();

  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> draws(trials * values.size());
  for (double& d : draws) d = unit(engine);

  std::vector<CalibrationPoint> curve;
  curve.reserve(noise_fractions.size());
  for (double a : noise_fractions) {
    const double half_width = a * kNormalizedRange;
    double total = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      double sum = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double corrupted = values[i] + half_width * draws[t * values.size() + i];
        const double d = corrupted - values[i];
        sum += d * d;
      }
      total += std::sqrt(sum / static_cast<double>(values.size()));
    }
    curve.push_back({a, total / static_cast<double>(trials), trials});
  }
  return curve;
}

}  // namespace bandfit
