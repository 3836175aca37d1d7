#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference variant and,
// on x86-64, an AVX2+FMA variant; the free functions dispatch to the best
// variant the running CPU supports.

#include <array>
#include <complex>
#include <span>
#include <string_view>

namespace bandfit::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
Isa detected_isa();
Isa active_isa();

/// Pins dispatch to `isa` for the whole process. Throws InvalidParameterError
/// if the CPU cannot run it. Intended for tests and benchmarks.
void set_active_isa(Isa isa);

/// Model samples: centered coordinates and the observed kernel values, all of
/// equal length.
struct GaborSamples {
  std::span<const double> x1;
  std::span<const double> x2;
  std::span<const double> data;
};

/// Packed (amplitude, phase, u1, u2, sigma).
using ParamVector = std::array<double, 5>;

/// J^T J (row-major 5x5), J^T r and r^T r for residual r = data - model and
/// J the model's Jacobian with respect to ParamVector.
struct NormalEquations {
  std::array<double, 25> jtj{};
  std::array<double, 5> jtr{};
  double rss = 0.0;
};

double gabor_rss(const GaborSamples& samples, const ParamVector& p);
NormalEquations gabor_normal_equations(const GaborSamples& samples, const ParamVector& p);

/// Unconjugated sum of a[i] * b[i].
std::complex<double> complex_dot(std::span<const std::complex<double>> a,
                                 std::span<const std::complex<double>> b);

namespace scalar {
double gabor_rss(const GaborSamples& samples, const ParamVector& p);
NormalEquations gabor_normal_equations(const GaborSamples& samples, const ParamVector& p);
std::complex<double> complex_dot(std::span<const std::complex<double>> a,
                                 std::span<const std::complex<double>> b);
}  // namespace scalar

#if defined(BANDFIT_HAVE_AVX2)
namespace avx2 {
// Only call after isa_available(Isa::avx2).
double gabor_rss(const GaborSamples& samples, const ParamVector& p);
NormalEquations gabor_normal_equations(const GaborSamples& samples, const ParamVector& p);
std::complex<double> complex_dot(std::span<const std::complex<double>> a,
                                 std::span<const std::complex<double>> b);
}  // namespace avx2
#endif

}  // namespace bandfit::simd
