#include "bandfit/fitting.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bandfit/error.hpp"
#include "bandfit/simd.hpp"

namespace bandfit {
namespace {

using std::numbers::pi;

constexpr std::size_t kMaxIterations = 200;
constexpr double kStepTolerance = 1e-10;
constexpr double kRelativeDecreaseTolerance = 1e-12;
constexpr double kMaxDamping = 1e20;

simd::ParamVector pack(const GaborParams& p) {
  return {p.amplitude, p.phase, p.u_c.u1, p.u_c.u2, p.sigma};
}

GaborParams unpack(const simd::ParamVector& v) { return {v[0], v[1], {v[2], v[3]}, v[4]}; }

void require_square(const Field2& kernel) {
  if (!kernel.is_square() || kernel.empty()) {
    throw ShapeError("kernel must be square, got " + std::to_string(kernel.height()) + "x" +
                     std::to_string(kernel.width()));
  }
}

double clamp_sigma(double sigma, std::size_t k) {
  const auto [lo, hi] = sigma_bounds(k);
  return std::clamp(sigma, lo, hi);
}

// Best amplitude and phase for fixed (u_c, sigma): least squares onto
// g*cos(u.x) and g*sin(u.x). Falls back to the cosine alone when the sine
// basis vanishes on the grid.
GaborParams project(const Field2& kernel, const Coords2& coords, Freq2 u, double sigma) {
  const Field2 window = gaussian_window(coords, sigma);
  double cc = 0.0, cs = 0.0, ss = 0.0, kc = 0.0, ks = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    const double theta = u.u1 * coords.x1[i] + u.u2 * coords.x2[i];
    const double bc = window.values()[i] * std::cos(theta);
    const double bs = window.values()[i] * std::sin(theta);
    const double v = kernel.values()[i];
    cc += bc * bc;
    cs += bc * bs;
    ss += bs * bs;
    kc += v * bc;
    ks += v * bs;
  }
  double alpha = 0.0;
  double beta = 0.0;
  const double det = cc * ss - cs * cs;
  if (ss > 1e-12 * cc && det > 1e-12 * cc * ss) {
    alpha = (kc * ss - ks * cs) / det;
    beta = (ks * cc - kc * cs) / det;
  } else if (cc > 0.0) {
    alpha = kc / cc;
  }
  // alpha*cos(t) + beta*sin(t) = A*cos(t + phase)
  return {std::hypot(alpha, beta), std::atan2(-beta, alpha), u, sigma};
}

bool in_canonical_half_plane(Freq2 u) { return u.u2 > 0.0 || (u.u2 == 0.0 && u.u1 >= 0.0); }

struct Samples {
  Coords2 coords;
  simd::GaborSamples view;
};

Samples make_samples(const Field2& kernel) {
  Samples s{grid_coords(kernel.width()), {}};
  s.view = {s.coords.x1, s.coords.x2, kernel.values()};
  return s;
}

}  // namespace

NormalizedKernel normalize_kernel(const Field2& raw) {
  require_square(raw);
  double peak = 0.0;
  for (double v : raw.values()) peak = std::max(peak, std::abs(v));
  if (!(peak > kFlatThreshold)) return {raw, 0.0, true};

  Field2 out = raw;
  for (double& v : out.values()) v /= peak;
  return {std::move(out), peak, false};
}

double objective_rms(const Field2& kernel, const GaborParams& params) {
  require_square(kernel);
  const Field2 model = gabor_kernel(kernel.width(), params);
  double sum = 0.0;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const double d = kernel.values()[i] - model.values()[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(kernel.size()));
}

std::vector<std::array<double, 5>> model_jacobian(std::size_t k, const GaborParams& params) {
  validate(params);
  const Coords2 coords = grid_coords(k);
  const double inv_s2 = 1.0 / (params.sigma * params.sigma);
  std::vector<std::array<double, 5>> rows(k * k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double x1 = coords.x1[i];
    const double x2 = coords.x2[i];
    const double r2 = x1 * x1 + x2 * x2;
    const double g = std::exp(-r2 * inv_s2);
    const double theta = params.u_c.u1 * x1 + params.u_c.u2 * x2 + params.phase;
    const double c = std::cos(theta);
    const double ags = -params.amplitude * g * std::sin(theta);
    rows[i] = {g * c, ags, ags * x1, ags * x2,
               params.amplitude * g * c * 2.0 * r2 * inv_s2 / params.sigma};
  }
  return rows;
}

std::vector<GaborParams> init_candidates(const Field2& kernel) {
  require_square(kernel);
  const std::size_t k = kernel.width();
  const std::size_t n = 4 * k;
  const Coords2 coords = grid_coords(k);
  const double sigma0 = clamp_sigma(static_cast<double>(k) / 2.0, k);

  const ComplexField2 spectrum = mtf(kernel, n);
  struct Peak {
    double magnitude;
    Freq2 u;
  };
  std::vector<Peak> peaks;
  for (std::size_t m2 = 0; m2 < n; ++m2) {
    for (std::size_t m1 = 0; m1 < n; ++m1) {
      const Freq2 u = bin_frequency({m1, m2}, n);
      if (in_canonical_half_plane(u)) peaks.push_back({std::abs(spectrum(m2, m1)), u});
    }
  }
  const std::size_t top = std::min<std::size_t>(3, peaks.size());
  std::partial_sort(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(top), peaks.end(),
                    [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });

  std::vector<GaborParams> starts;
  for (std::size_t i = 0; i < top; ++i) starts.push_back(project(kernel, coords, peaks[i].u, sigma0));
  starts.push_back(project(kernel, coords, {0.0, 0.0}, sigma0));
  for (int o = 0; o < 4; ++o) {
    const double angle = pi * o / 4.0;
    starts.push_back(
        project(kernel, coords, {pi / 2.0 * std::cos(angle), pi / 2.0 * std::sin(angle)}, sigma0));
  }
  return starts;
}

Refinement refine(const Field2& kernel, const GaborParams& start) {
  require_square(kernel);
  validate(start);
  const std::size_t k = kernel.width();
  const Samples samples = make_samples(kernel);

  simd::ParamVector p = pack(start);
  p[4] = clamp_sigma(p[4], k);
  simd::NormalEquations ne = simd::gabor_normal_equations(samples.view, p);
  double f = ne.rss;
  if (!std::isfinite(f)) throw NumericalFailureError("objective is not finite at the start point");

  using Mat5 = Eigen::Matrix<double, 5, 5>;
  using Vec5 = Eigen::Matrix<double, 5, 1>;

  const auto max_diag = [&ne] {
    double m = 0.0;
    for (int i = 0; i < 5; ++i) m = std::max(m, ne.jtj[i * 5 + i]);
    return m;
  };
  double damping = 1e-3;
  std::size_t accepted = 0;

  while (accepted < kMaxIterations && f > 0.0) {
    const Mat5 jtj = Eigen::Map<const Eigen::Matrix<double, 5, 5, Eigen::RowMajor>>(ne.jtj.data());
    const Vec5 jtr = Eigen::Map<const Vec5>(ne.jtr.data());
    if (jtr.cwiseAbs().maxCoeff() == 0.0) break;

    const double floor = std::max(1e-12 * max_diag(), std::numeric_limits<double>::min());
    Mat5 system = jtj;
    for (int i = 0; i < 5; ++i) system(i, i) += damping * std::max(jtj(i, i), floor);
    const Eigen::LDLT<Mat5> ldlt(system);
    if (ldlt.info() != Eigen::Success) {
      damping *= 4.0;
      if (damping > kMaxDamping) break;
      continue;
    }
    const Vec5 step = ldlt.solve(jtr);
    if (!step.allFinite()) throw NumericalFailureError("non-finite Gauss-Newton step");

    simd::ParamVector trial = p;
    for (int i = 0; i < 5; ++i) trial[i] += step[i];
    trial[4] = clamp_sigma(trial[4], k);
    double moved = 0.0;
    for (int i = 0; i < 5; ++i) moved += (trial[i] - p[i]) * (trial[i] - p[i]);
    if (std::sqrt(moved) < kStepTolerance) break;

    const double f_trial = simd::gabor_rss(samples.view, trial);
    if (!std::isfinite(f_trial)) throw NumericalFailureError("objective became non-finite");

    if (f_trial < f) {
      const double decrease = (f - f_trial) / f;
      p = trial;
      f = f_trial;
      ++accepted;
      damping = std::max(damping / 3.0, 1e-15);
      if (decrease < kRelativeDecreaseTolerance) break;
      ne = simd::gabor_normal_equations(samples.view, p);
    } else {
      damping *= 4.0;
      if (damping > kMaxDamping) break;
    }
  }
  return {unpack(p), accepted};
}

GaborParams canonicalize(const GaborParams& params, std::size_t k) {
  GaborParams out = params;
  const bool half_integer_grid = k % 2 == 0;
  for (double* u : {&out.u_c.u1, &out.u_c.u2}) {
    const double wrapped = wrap_angle(*u);
    const double turns = std::round((*u - wrapped) / (2.0 * pi));
    // On a half-integer grid each 2*pi turn flips the sign of every sample.
    if (half_integer_grid && std::fmod(std::abs(turns), 2.0) == 1.0) out.phase += pi;
    *u = wrapped;
  }
  if (out.amplitude < 0.0) {
    out.amplitude = -out.amplitude;
    out.phase += pi;
  }
  if (!in_canonical_half_plane(out.u_c)) {
    out.u_c = {-out.u_c.u1, -out.u_c.u2};
    out.phase = -out.phase;
  }
  out.phase = wrap_angle(out.phase);
  if (out.u_c.u1 == 0.0 && out.u_c.u2 == 0.0) out.phase = std::abs(out.phase);
  return out;
}

FitResult fit_kernel(const Field2& raw) {
  NormalizedKernel normalized = normalize_kernel(raw);
  const std::size_t k = raw.width();

  if (normalized.degenerate || k < 2) {
    FitResult flat;
    flat.params = {0.0, 0.0, {0.0, 0.0}, clamp_sigma(static_cast<double>(k) / 2.0, k)};
    flat.rms = objective_rms(normalized.kernel, flat.params);
    flat.degenerate = true;
    flat.scale = normalized.scale;
    return flat;
  }

  const Field2& kernel = normalized.kernel;
  const std::vector<GaborParams> starts = init_candidates(kernel);

  FitResult best;
  best.rms = std::numeric_limits<double>::infinity();
  best.scale = normalized.scale;
  for (std::size_t rank = 0; rank < starts.size(); ++rank) {
    Refinement refined;
    try {
      refined = refine(kernel, starts[rank]);
    } catch (const NumericalFailureError&) {
      continue;
    }
    const GaborParams params = canonicalize(refined.params, k);
    const double rms = objective_rms(kernel, params);
    if (rms < best.rms) {
      best.params = params;
      best.rms = rms;
      best.iterations = refined.iterations;
      best.init_rank = rank;
    }
  }
  if (!std::isfinite(best.rms)) {
    throw NumericalFailureError("every initial candidate failed to refine");
  }
  return best;
}

}  // namespace bandfit
