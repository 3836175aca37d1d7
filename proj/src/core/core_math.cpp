#include "bandfit/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bandfit/error.hpp"
#include "bandfit/simd.hpp"

namespace bandfit {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e^{sign * i 2 pi (m n mod N) / N}, row m holds the twiddles for output bin m.
std::vector<std::complex<double>> twiddles(std::size_t n, double sign) {
  std::vector<std::complex<double>> table(n * n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = sign * kTwoPi * static_cast<double>((m * j) % n) / static_cast<double>(n);
      table[m * n + j] = {std::cos(angle), std::sin(angle)};
    }
  }
  return table;
}

ComplexField2 separable_dft(const ComplexField2& in, double sign, double scale) {
  const std::size_t h = in.height();
  const std::size_t w = in.width();
  const auto tw_w = twiddles(w, sign);
  const auto tw_h = twiddles(h, sign);
  const std::span<const std::complex<double>> values = in.values();

  // Row pass, stored transposed so the column pass also reads contiguously.
  std::vector<std::complex<double>> t(w * h);
  for (std::size_t r = 0; r < h; ++r) {
    const auto row = values.subspan(r * w, w);
    for (std::size_t m = 0; m < w; ++m) {
      t[m * h + r] = simd::complex_dot(row, std::span(tw_w).subspan(m * w, w));
    }
  }

  ComplexField2 out(h, w);
  for (std::size_t m = 0; m < w; ++m) {
    const auto column = std::span<const std::complex<double>>(t).subspan(m * h, h);
    for (std::size_t p = 0; p < h; ++p) {
      out(p, m) = scale * simd::complex_dot(column, std::span(tw_h).subspan(p * h, h));
    }
  }
  return out;
}

template <class T>
Grid2<T> convolve(const Grid2<T>& f, const Field2& h) {
  if (f.height() != h.height() || f.width() != h.width()) {
    throw SizeMismatchError("circular convolution needs equal shapes, got " +
                            std::to_string(f.height()) + "x" + std::to_string(f.width()) +
                            " and " + std::to_string(h.height()) + "x" + std::to_string(h.width()));
  }
  const std::size_t rows = f.height();
  const std::size_t cols = f.width();
  Grid2<T> out(rows, cols);
  for (std::size_t a2 = 0; a2 < rows; ++a2) {
    for (std::size_t a1 = 0; a1 < cols; ++a1) {
      const double tap = h(a2, a1);
      if (tap == 0.0) continue;
      for (std::size_t n2 = 0; n2 < rows; ++n2) {
        const std::size_t s2 = (n2 + rows - a2) % rows;
        for (std::size_t n1 = 0; n1 < cols; ++n1) {
          out(n2, n1) += f(s2, (n1 + cols - a1) % cols) * tap;
        }
      }
    }
  }
  return out;
}

void check_bin(FreqIndex bin, std::size_t n) {
  if (bin.m1 >= n || bin.m2 >= n) {
    throw IndexError("frequency index (" + std::to_string(bin.m1) + ", " +
                     std::to_string(bin.m2) + ") outside [0, " + std::to_string(n) + ")");
  }
}

}  // namespace

void validate(const GaborParams& p) {
  if (!std::isfinite(p.amplitude) || !std::isfinite(p.phase) || !std::isfinite(p.u_c.u1) ||
      !std::isfinite(p.u_c.u2) || !std::isfinite(p.sigma)) {
    throw InvalidParameterError("Gabor parameters must be finite");
  }
  if (p.sigma <= 0.0) {
    throw InvalidParameterError("window sigma must be positive, got " + std::to_string(p.sigma));
  }
}

Coords2 grid_coords(std::size_t k) {
  if (k == 0) throw InvalidSizeError("kernel side must be positive");
  Coords2 coords;
  coords.side = k;
  coords.x1.reserve(k * k);
  coords.x2.reserve(k * k);
  const double offset = static_cast<double>(k - 1) / 2.0;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      coords.x1.push_back(static_cast<double>(c) - offset);
      coords.x2.push_back(static_cast<double>(r) - offset);
    }
  }
  return coords;
}

Field2 gaussian_window(const Coords2& coords, double sigma, double kappa) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameterError("window sigma must be positive and finite, got " +
                                std::to_string(sigma));
  }
  if (!std::isfinite(kappa)) throw InvalidParameterError("window scale must be finite");
  if (coords.side == 0) throw InvalidSizeError("empty coordinate grid");

  const double inv_s2 = 1.0 / (sigma * sigma);
  std::vector<double> values(coords.x1.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r2 = coords.x1[i] * coords.x1[i] + coords.x2[i] * coords.x2[i];
    values[i] = kappa * std::exp(-r2 * inv_s2);
  }
  return Field2(coords.side, coords.side, std::move(values));
}

Field2 gabor_kernel(std::size_t k, const GaborParams& params) {
  validate(params);
  const Coords2 coords = grid_coords(k);
  Field2 out = gaussian_window(coords, params.sigma);
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double theta = params.u_c.u1 * coords.x1[i] + params.u_c.u2 * coords.x2[i] + params.phase;
    values[i] = params.amplitude * values[i] * std::cos(theta);
  }
  return out;
}

ComplexField2 wft_kernel(std::size_t k, double window_sigma, Freq2 u_c) {
  const Coords2 coords = grid_coords(k);
  const Field2 window = gaussian_window(coords, window_sigma);
  ComplexField2 out(k, k);
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double theta = u_c.u1 * coords.x1[i] + u_c.u2 * coords.x2[i];
    const double w = window.values()[i];
    values[i] = {w * std::cos(theta), w * std::sin(theta)};
  }
  return out;
}

ComplexField2 dft2(const ComplexField2& field) { return separable_dft(field, -1.0, 1.0); }

ComplexField2 inverse_dft2(const ComplexField2& spectrum) {
  return separable_dft(spectrum, 1.0,
                       1.0 / static_cast<double>(spectrum.height() * spectrum.width()));
}

Field2 circular_convolve2(const Field2& f, const Field2& h) { return convolve(f, h); }

ComplexField2 circular_convolve2(const ComplexField2& f, const Field2& h) { return convolve(f, h); }

Field2 pad_kernel(const Field2& kernel, std::size_t n) {
  if (kernel.height() > n || kernel.width() > n) {
    throw InvalidSizeError("kernel of " + std::to_string(kernel.height()) + "x" +
                           std::to_string(kernel.width()) + " does not fit a " +
                           std::to_string(n) + "x" + std::to_string(n) + " grid");
  }
  Field2 out(n, n);
  for (std::size_t r = 0; r < kernel.height(); ++r) {
    for (std::size_t c = 0; c < kernel.width(); ++c) out(r, c) = kernel(r, c);
  }
  return out;
}

ComplexField2 mtf(const Field2& kernel, std::size_t n) { return dft2(to_complex(pad_kernel(kernel, n))); }

std::complex<double> mtf_at(const Field2& kernel, std::size_t n, FreqIndex bin) {
  check_bin(bin, n);
  if (kernel.height() > n || kernel.width() > n) {
    throw InvalidSizeError("kernel does not fit the frequency grid");
  }
  std::complex<double> sum = 0.0;
  for (std::size_t a2 = 0; a2 < kernel.height(); ++a2) {
    for (std::size_t a1 = 0; a1 < kernel.width(); ++a1) {
      const std::size_t phase_index = (bin.m1 * a1 + bin.m2 * a2) % n;
      const double angle = -kTwoPi * static_cast<double>(phase_index) / static_cast<double>(n);
      sum += kernel(a2, a1) * std::complex<double>(std::cos(angle), std::sin(angle));
    }
  }
  return sum;
}

ComplexField2 complex_exponential(std::size_t n, FreqIndex bin) {
  check_bin(bin, n);
  ComplexField2 out(n, n);
  for (std::size_t n2 = 0; n2 < n; ++n2) {
    for (std::size_t n1 = 0; n1 < n; ++n1) {
      const std::size_t phase_index = (bin.m1 * n1 + bin.m2 * n2) % n;
      const double angle = kTwoPi * static_cast<double>(phase_index) / static_cast<double>(n);
      out(n2, n1) = {std::cos(angle), std::sin(angle)};
    }
  }
  return out;
}

double eigenfunction_residual(const Field2& kernel, FreqIndex bin, std::size_t n) {
  return eigenfunction_residual(kernel, bin, n, [](const ComplexField2& f, const Field2& h) {
    return circular_convolve2(f, h);
  });
}

double eigenfunction_residual(const Field2& kernel, FreqIndex bin, std::size_t n,
                              const ComplexConvolver& convolve_fn) {
  check_bin(bin, n);
  const ComplexField2 e = complex_exponential(n, bin);
  const ComplexField2 response = convolve_fn(e, pad_kernel(kernel, n));
  const std::complex<double> lambda = mtf_at(kernel, n, bin);

  double worst = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    worst = std::max(worst, std::abs(response.values()[i] - lambda * e.values()[i]));
  }
  return worst;
}

FreqIndex frequency_bin(Freq2 u, std::size_t n) {
  if (n == 0) throw InvalidSizeError("frequency grid must be non-empty");
  const auto to_index = [n](double component) {
    const double m = component * static_cast<double>(n) / kTwoPi;
    const double rounded = std::round(m);
    if (!std::isfinite(m) || std::abs(m - rounded) > 1e-9 * std::max(1.0, std::abs(m))) {
      throw PreconditionError("frequency " + std::to_string(component) +
                              " is not aligned with a DFT bin of a " + std::to_string(n) +
                              "-point grid");
    }
    const auto size = static_cast<long long>(n);
    return static_cast<std::size_t>(((static_cast<long long>(rounded) % size) + size) % size);
  };
  return {to_index(u.u1), to_index(u.u2)};
}

Freq2 bin_frequency(FreqIndex bin, std::size_t n) {
  const auto component = [n](std::size_t m) {
    const auto signed_m = 2 * m > n ? static_cast<double>(m) - static_cast<double>(n)
                                    : static_cast<double>(m);
    return kTwoPi * signed_m / static_cast<double>(n);
  };
  return {component(bin.m1), component(bin.m2)};
}

double wrap_angle(double theta) {
  double wrapped = std::remainder(theta, kTwoPi);
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  return wrapped;
}

double wft_shift_residual(const Field2& window, Freq2 u_c, std::size_t n) {
  const FreqIndex bin = frequency_bin(u_c, n);
  const Field2 padded = pad_kernel(window, n);
  const ComplexField2 carrier = complex_exponential(n, bin);

  ComplexField2 modulated(n, n);
  for (std::size_t i = 0; i < modulated.size(); ++i) {
    modulated.values()[i] = padded.values()[i] * carrier.values()[i];
  }
  const ComplexField2 shifted_spectrum = dft2(modulated);
  const ComplexField2 window_spectrum = dft2(to_complex(padded));

  double worst = 0.0;
  for (std::size_t p2 = 0; p2 < n; ++p2) {
    for (std::size_t p1 = 0; p1 < n; ++p1) {
      const auto& expected = window_spectrum((p2 + n - bin.m2) % n, (p1 + n - bin.m1) % n);
      worst = std::max(worst, std::abs(shifted_spectrum(p2, p1) - expected));
    }
  }
  return worst;
}

}  // namespace bandfit
