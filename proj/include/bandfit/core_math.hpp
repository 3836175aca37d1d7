#pragma once

#include <complex>
#include <cstddef>
#include <functional>

#include "bandfit/field.hpp"

namespace bandfit {

/// Parameters of the real Gabor-like model A * g(x; sigma) * cos(u_c . x + phase)
/// with g(x; sigma) = exp(-|x|^2 / sigma^2).
struct GaborParams {
  double amplitude = 1.0;
  double phase = 0.0;
  Freq2 u_c;
  double sigma = 1.0;

  friend bool operator==(const GaborParams&, const GaborParams&) = default;
};

/// Throws InvalidParameterError unless sigma > 0 and every field is finite.
void validate(const GaborParams& params);

Coords2 grid_coords(std::size_t k);

/// kappa * exp(-(x1^2 + x2^2) / sigma^2) at every coordinate.
Field2 gaussian_window(const Coords2& coords, double sigma, double kappa = 1.0);

/// k x k real pointspread of the Gabor-like model.
Field2 gabor_kernel(std::size_t k, const GaborParams& params);

/// Complex pointspread w(x) * exp(i u_c . x) with a unit-height Gaussian window.
ComplexField2 wft_kernel(std::size_t k, double window_sigma, Freq2 u_c);

/// Unnormalized forward DFT with the exp(-i 2 pi m n / N) kernel.
ComplexField2 dft2(const ComplexField2& field);

/// Inverse of dft2: exp(+i ...) kernel scaled by 1 / (N1 * N2).
ComplexField2 inverse_dft2(const ComplexField2& spectrum);

/// out(n) = sum_a f(n - a mod N) * h(a). Both operands must share a shape.
Field2 circular_convolve2(const Field2& f, const Field2& h);
ComplexField2 circular_convolve2(const ComplexField2& f, const Field2& h);

/// Zero-pads `kernel` onto an n x n grid with its first sample at the origin.
Field2 pad_kernel(const Field2& kernel, std::size_t n);

/// Frequency response of `kernel` zero-padded to n x n.
ComplexField2 mtf(const Field2& kernel, std::size_t n);

/// Single bin of mtf(kernel, n), evaluated directly.
std::complex<double> mtf_at(const Field2& kernel, std::size_t n, FreqIndex bin);

/// exp(i 2 pi (m1 n1 + m2 n2) / n) sampled over the n x n grid.
ComplexField2 complex_exponential(std::size_t n, FreqIndex bin);

using ComplexConvolver = std::function<ComplexField2(const ComplexField2&, const Field2&)>;

/// Max deviation of (exponential * kernel) from lambda * exponential, where
/// lambda is the kernel's MTF at `bin`. The convolver overload exists so a
/// caller can check the residual against an alternative convolution.
double eigenfunction_residual(const Field2& kernel, FreqIndex bin, std::size_t n);
double eigenfunction_residual(const Field2& kernel, FreqIndex bin, std::size_t n,
                              const ComplexConvolver& convolve);

/// Max deviation between the spectrum of window(x) * exp(i u_c . x) and the
/// window's spectrum circularly shifted to u_c. Only exact for bin-aligned
/// u_c; anything else raises PreconditionError.
double wft_shift_residual(const Field2& window, Freq2 u_c, std::size_t n);

/// Maps a bin-aligned frequency onto its DFT index, or throws PreconditionError.
FreqIndex frequency_bin(Freq2 u, std::size_t n);

/// Frequency of a DFT index, each component wrapped into (-pi, pi].
Freq2 bin_frequency(FreqIndex bin, std::size_t n);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

}  // namespace bandfit
