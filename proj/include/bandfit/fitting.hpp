#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "bandfit/core_math.hpp"
#include "bandfit/field.hpp"

namespace bandfit {

/// Kernels whose peak magnitude does not exceed this are treated as flat.
inline constexpr double kFlatThreshold = 1e-8;

struct SigmaBounds {
  double lower;
  double upper;
};

/// Search domain for sigma on a k x k kernel: [0.25, 8k].
constexpr SigmaBounds sigma_bounds(std::size_t k) { return {0.25, 8.0 * static_cast<double>(k)}; }

struct NormalizedKernel {
  Field2 kernel;
  double scale = 0.0;
  bool degenerate = false;
};

struct FitResult {
  GaborParams params;
  /// RMS residual on the unit-peak normalized kernel.
  double rms = 0.0;
  bool degenerate = false;
  std::size_t iterations = 0;
  /// Index into init_candidates() of the start that won.
  std::size_t init_rank = 0;
  /// Peak magnitude the raw kernel was divided by (0 when flat).
  double scale = 0.0;
};

struct Refinement {
  GaborParams params;
  std::size_t iterations = 0;
};

/// Divides a square kernel by its peak magnitude. Kernels with peak
/// magnitude <= kFlatThreshold come back unscaled and flagged degenerate.
NormalizedKernel normalize_kernel(const Field2& raw);

/// sqrt(mean((kernel - gabor_kernel(k, params))^2)).
double objective_rms(const Field2& kernel, const GaborParams& params);

/// Analytic partial derivatives of the model at every sample (row-major),
/// ordered (amplitude, phase, u1, u2, sigma).
std::vector<std::array<double, 5>> model_jacobian(std::size_t k, const GaborParams& params);

/// Multi-start initial guesses: the three strongest spectral peaks of the
/// kernel on a 4k grid, a flat start, then four fixed orientations at
/// |u_c| = pi/2. Amplitude and phase of each come from a least-squares
/// projection onto the cosine/sine pair at that frequency.
std::vector<GaborParams> init_candidates(const Field2& kernel);

/// Damped Gauss-Newton descent from `start`. The returned objective never
/// exceeds the objective at `start` (sigma clamped to its bounds). Throws
/// NumericalFailureError if the objective stops being finite.
Refinement refine(const Field2& kernel, const GaborParams& start);

/// Resolves the model's symmetries: u_c wrapped into (-pi, pi] and moved to
/// the closed upper half-plane, amplitude made non-negative, phase wrapped
/// into (-pi, pi]. The k x k model values are unchanged.
GaborParams canonicalize(const GaborParams& params, std::size_t k);

/// Normalizes `raw` and fits the model from every initial candidate,
/// keeping the lowest residual (earliest candidate on ties).
FitResult fit_kernel(const Field2& raw);

}  // namespace bandfit
