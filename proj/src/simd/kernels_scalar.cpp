#include <algorithm>
#include <cmath>

#include "bandfit/simd.hpp"

namespace bandfit::simd::scalar {

double gabor_rss(const GaborSamples& s, const ParamVector& p) {
  const auto [amplitude, phase, u1, u2, sigma] = p;
  const double inv_s2 = 1.0 / (sigma * sigma);
  double rss = 0.0;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const double r2 = s.x1[i] * s.x1[i] + s.x2[i] * s.x2[i];
    const double g = std::exp(-r2 * inv_s2);
    const double model = amplitude * g * std::cos(u1 * s.x1[i] + u2 * s.x2[i] + phase);
    const double r = s.data[i] - model;
    rss += r * r;
  }
  return rss;
}

NormalEquations gabor_normal_equations(const GaborSamples& s, const ParamVector& p) {
  const auto [amplitude, phase, u1, u2, sigma] = p;
  const double inv_s2 = 1.0 / (sigma * sigma);
  const double dsigma_scale = 2.0 * inv_s2 / sigma;

  NormalEquations ne;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const double x1 = s.x1[i];
    const double x2 = s.x2[i];
    const double r2 = x1 * x1 + x2 * x2;
    const double g = std::exp(-r2 * inv_s2);
    const double theta = u1 * x1 + u2 * x2 + phase;
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    const double model = amplitude * g * c;
    const double r = s.data[i] - model;

    const double ags = -amplitude * g * sn;
    const std::array<double, 5> j{g * c, ags, ags * x1, ags * x2, model * r2 * dsigma_scale};
    for (int a = 0; a < 5; ++a) {
      ne.jtr[a] += j[a] * r;
      for (int b = a; b < 5; ++b) ne.jtj[a * 5 + b] += j[a] * j[b];
    }
    ne.rss += r * r;
  }
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < a; ++b) ne.jtj[a * 5 + b] = ne.jtj[b * 5 + a];
  }
  return ne;
}

std::complex<double> complex_dot(std::span<const std::complex<double>> a,
                                 std::span<const std::complex<double>> b) {
  double re = 0.0;
  double im = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

}  // namespace bandfit::simd::scalar
