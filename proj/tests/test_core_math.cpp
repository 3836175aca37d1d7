#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bandfit/core_math.hpp"
#include "bandfit/error.hpp"
#include "oracles.hpp"

using namespace bandfit;
using std::numbers::pi;

namespace {

double max_abs_diff(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double max_abs(std::span<const std::complex<double>> a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("grid_coords is centered and symmetric") {
  const Coords2 c3 = grid_coords(3);
  CHECK(c3.x1 == std::vector<double>{-1, 0, 1, -1, 0, 1, -1, 0, 1});
  CHECK(c3.x2 == std::vector<double>{-1, -1, -1, 0, 0, 0, 1, 1, 1});

  const Coords2 c1 = grid_coords(1);
  CHECK(c1.x1 == std::vector<double>{0});
  CHECK(c1.x2 == std::vector<double>{0});

  const Coords2 c2 = grid_coords(2);
  CHECK(c2.x1 == std::vector<double>{-0.5, 0.5, -0.5, 0.5});
  CHECK(c2.x2 == std::vector<double>{-0.5, -0.5, 0.5, 0.5});

  for (std::size_t k = 1; k <= 12; ++k) {
    const Coords2 c = grid_coords(k);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < c.x1.size(); ++i) {
      s1 += c.x1[i];
      s2 += c.x2[i];
    }
    CHECK(s1 == 0.0);
    CHECK(s2 == 0.0);
  }
  CHECK_THROWS_AS(grid_coords(0), InvalidSizeError);
}

TEST_CASE("gaussian_window uses sigma^2 in the denominator") {
  const Field2 w3 = gaussian_window(grid_coords(3), 1.0, 1.0);
  CHECK(w3(1, 1) == 1.0);
  CHECK(w3(1, 2) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(w3(1, 2) == std::exp(-1.0));

  const Field2 zero = gaussian_window(grid_coords(4), 1.5, 0.0);
  for (double v : zero.values()) CHECK(v == 0.0);

  const Field2 w5 = gaussian_window(grid_coords(5), 2.0, 1.0);
  // (x1, x2) = (2, 1) sits at row 3, column 4.
  CHECK(w5(3, 4) == doctest::Approx(0.286505).epsilon(1e-6));
  CHECK(w5(3, 4) == std::exp(-5.0 / 4.0));

  CHECK_THROWS_AS(gaussian_window(grid_coords(3), 0.0), InvalidParameterError);
  CHECK_THROWS_AS(gaussian_window(grid_coords(3), -2.0), InvalidParameterError);
}

TEST_CASE("gabor_kernel special cases") {
  const Field2 window = gaussian_window(grid_coords(7), 1.7);
  CHECK(gabor_kernel(7, {1.0, 0.0, {0.0, 0.0}, 1.7}) == window);

  const Field2 quadrature = gabor_kernel(7, {1.0, pi / 2.0, {0.0, 0.0}, 1.7});
  for (double v : quadrature.values()) CHECK(std::abs(v) < 1e-16);

  CHECK_THROWS_AS(gabor_kernel(5, {1.0, 0.0, {0.1, 0.2}, 0.0}), InvalidParameterError);
  CHECK_THROWS_AS(gabor_kernel(5, {NAN, 0.0, {0.1, 0.2}, 1.0}), InvalidParameterError);
}

TEST_CASE("gabor_kernel oscillates along u_c with period 2 pi / |u_c|") {
  const std::size_t k = 9;
  const GaborParams p{1.0, 0.0, {pi / 2.0, 0.0}, 2.0};
  const Field2 kernel = gabor_kernel(k, p);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      const double expected =
          oracle::gabor_at(oracle::centered(c, k), oracle::centered(r, k), 1.0, 0.0, pi / 2.0, 0.0, 2.0);
      CHECK(kernel(r, c) == doctest::Approx(expected).epsilon(1e-15));
    }
  }
  // Row x2 = 0: even x1 alternate in sign every 2 samples, repeat every 4.
  const std::size_t mid = k / 2;
  for (std::size_t c = 0; c + 4 < k; c += 2) {
    if (std::abs(kernel(mid, c)) < 1e-12) continue;
    CHECK(std::signbit(kernel(mid, c)) == std::signbit(kernel(mid, c + 4)));
    CHECK(std::signbit(kernel(mid, c)) != std::signbit(kernel(mid, c + 2)));
  }
  // Constant along the orthogonal direction before windowing.
  const Field2 window = gaussian_window(grid_coords(k), 2.0);
  for (std::size_t r = 0; r < k; ++r) {
    CHECK(kernel(r, 1) / window(r, 1) == doctest::Approx(kernel(mid, 1) / window(mid, 1)));
  }
}

TEST_CASE("Gabor symmetries hold exactly") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> s(0.5, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + trial % 10;
    const GaborParams even{u(rng), 0.0, {u(rng), u(rng)}, s(rng)};
    const Field2 kernel = gabor_kernel(k, even);
    const auto v = kernel.values();
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == v[v.size() - 1 - i]);

    GaborParams p{u(rng), u(rng), {u(rng), u(rng)}, s(rng)};
    GaborParams flipped = p;
    flipped.u_c = {-p.u_c.u1, -p.u_c.u2};
    flipped.phase = -p.phase;
    CHECK(gabor_kernel(k, p) == gabor_kernel(k, flipped));
  }
}

TEST_CASE("dft2 impulse, constant and brute-force oracle") {
  ComplexField2 delta(4, 4);
  delta(0, 0) = 1.0;
  const ComplexField2 delta_spectrum = dft2(delta);
  for (const auto& v : delta_spectrum.values()) {
    CHECK(v.real() == doctest::Approx(1.0));
    CHECK(std::abs(v.imag()) < 1e-15);
  }

  const double c = 0.75;
  ComplexField2 flat(8, 8, std::vector<std::complex<double>>(64, c));
  const ComplexField2 flat_spectrum = dft2(flat);
  CHECK(std::abs(flat_spectrum(0, 0) - std::complex<double>(64 * c)) < 1e-12);
  for (std::size_t i = 1; i < 64; ++i) CHECK(std::abs(flat_spectrum.values()[i]) < 1e-12);

  std::mt19937_64 rng(11);
  const ComplexField2 f = oracle::random_complex_field(rng, 6, 6);
  const auto expected = oracle::dft(std::vector(f.values().begin(), f.values().end()), 6, 6);
  CHECK(max_abs_diff(dft2(f).values(), expected) <= 1e-10 * max_abs(expected));

  const ComplexField2 rect = oracle::random_complex_field(rng, 3, 5);
  const auto rect_expected = oracle::dft(std::vector(rect.values().begin(), rect.values().end()), 3, 5);
  CHECK(max_abs_diff(dft2(rect).values(), rect_expected) <= 1e-10 * max_abs(rect_expected));
}

TEST_CASE("dft2 round trip and Parseval") {
  std::mt19937_64 rng(3);
  for (std::size_t n = 1; n <= 16; ++n) {
    const ComplexField2 f = oracle::random_complex_field(rng, n, n);
    const ComplexField2 spectrum = dft2(f);
    const ComplexField2 back = inverse_dft2(spectrum);
    CHECK(max_abs_diff(back.values(), f.values()) <= 1e-10 * max_abs(f.values()));

    double energy = 0.0, spectral = 0.0;
    for (const auto& v : f.values()) energy += std::norm(v);
    for (const auto& v : spectrum.values()) spectral += std::norm(v);
    CHECK(spectral / static_cast<double>(n * n) == doctest::Approx(energy).epsilon(1e-9));
  }
}

TEST_CASE("circular_convolve2 identity, shift and convolution theorem") {
  std::mt19937_64 rng(5);
  const Field2 f = oracle::random_field(rng, 5, 5);

  Field2 delta(5, 5);
  delta(0, 0) = 1.0;
  CHECK(circular_convolve2(f, delta) == f);

  Field2 shift(5, 5);
  shift(0, 1) = 1.0;  // (x1, x2) = (1, 0)
  const Field2 shifted = circular_convolve2(f, shift);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 5; ++c) CHECK(shifted(r, c) == f(r, (c + 4) % 5));
  }

  for (std::size_t n : {5u, 8u}) {
    const Field2 a = oracle::random_field(rng, n, n);
    const Field2 b = oracle::random_field(rng, n, n);
    const ComplexField2 fa = dft2(to_complex(a));
    const ComplexField2 fb = dft2(to_complex(b));
    ComplexField2 product(n, n);
    for (std::size_t i = 0; i < n * n; ++i) product.values()[i] = fa.values()[i] * fb.values()[i];
    const ComplexField2 spectral = inverse_dft2(product);
    const Field2 direct = circular_convolve2(a, b);
    for (std::size_t i = 0; i < n * n; ++i) {
      CHECK(std::abs(direct.values()[i] - spectral.values()[i].real()) < 1e-9);
      CHECK(std::abs(spectral.values()[i].imag()) < 1e-9);
    }
  }

  CHECK_THROWS_AS(circular_convolve2(Field2(3, 3), Field2(4, 4)), SizeMismatchError);
}

TEST_CASE("mtf values") {
  const ComplexField2 unit = mtf(Field2(1, 1, {1.0}), 8);
  for (const auto& v : unit.values()) CHECK(std::abs(v - std::complex<double>(1.0)) < 1e-15);

  const Field2 zero_sum(2, 2, {1.0, -1.0, 2.0, -2.0});
  CHECK(std::abs(mtf(zero_sum, 8)(0, 0)) < 1e-15);

  std::mt19937_64 rng(13);
  const Field2 kernel = oracle::random_field(rng, 3, 3);
  const ComplexField2 spectrum = mtf(kernel, 8);
  double sum = 0.0;
  for (double v : kernel.values()) sum += v;
  CHECK(spectrum(0, 0).real() == doctest::Approx(sum));
  for (std::size_t m2 = 0; m2 < 8; ++m2) {
    for (std::size_t m1 = 0; m1 < 8; ++m1) {
      CHECK(std::abs(spectrum(m2, m1) - mtf_at(kernel, 8, {m1, m2})) < 1e-13);
    }
  }

  CHECK_THROWS_AS(mtf(Field2(9, 9), 8), InvalidSizeError);
}

TEST_CASE("Gabor spectrum peaks at the bin nearest u_c") {
  const std::size_t n = 32;
  const Field2 kernel = gabor_kernel(9, {1.0, 0.0, {pi / 2.0, 0.0}, 2.0});
  const Field2 padded = pad_kernel(kernel, n);
  const auto spectrum =
      oracle::dft(std::vector<std::complex<double>>(padded.values().begin(), padded.values().end()), n, n);
  std::size_t best = 0;
  for (std::size_t i = 1; i < spectrum.size(); ++i) {
    if (std::abs(spectrum[i]) > std::abs(spectrum[best])) best = i;
  }
  const std::size_t m1 = best % n;
  const std::size_t m2 = best / n;
  CHECK(m2 == 0);
  CHECK((m1 == 8 || m1 == 24));

  const ComplexField2 ours = mtf(kernel, n);
  CHECK(std::abs(ours(0, 8)) == doctest::Approx(std::abs(spectrum[best])));
  for (const auto& v : ours.values()) CHECK(std::abs(v) <= std::abs(ours(0, 8)) * (1 + 1e-12));
}

TEST_CASE("eigenfunction_residual") {
  std::mt19937_64 rng(17);
  const std::size_t n = 16;
  for (int trial = 0; trial < 20; ++trial) {
    const Field2 kernel = oracle::random_field(rng, 3, 3);
    for (std::size_t m2 = 0; m2 < n; ++m2) {
      for (std::size_t m1 = 0; m1 < n; ++m1) CHECK(eigenfunction_residual(kernel, {m1, m2}, n) < 1e-10);
    }
  }

  const Field2 delta(1, 1, {1.0});
  for (std::size_t m = 0; m < n; ++m) {
    CHECK(std::abs(mtf_at(delta, n, {m, 3}) - std::complex<double>(1.0)) < 1e-15);
    CHECK(eigenfunction_residual(delta, {m, 3}, n) < 1e-12);
  }

  const Field2 shift(1, 2, {0.0, 1.0});
  for (std::size_t m = 0; m < n; ++m) {
    const auto expected = std::polar(1.0, -2.0 * pi * static_cast<double>(m) / static_cast<double>(n));
    CHECK(std::abs(mtf_at(shift, n, {m, 0}) - expected) < 1e-14);
    CHECK(eigenfunction_residual(shift, {m, 0}, n) < 1e-10);
  }

  CHECK_THROWS_AS(eigenfunction_residual(delta, {n, 0}, n), IndexError);
  CHECK_THROWS_AS(eigenfunction_residual(delta, {0, n + 3}, n), IndexError);
}

TEST_CASE("eigenfunction_residual detects a broken convolution") {
  const Field2 kernel(2, 2, {0.5, 0.25, -0.25, 1.0});
  const ComplexConvolver broken = [](const ComplexField2& f, const Field2& h) {
    ComplexField2 out = circular_convolve2(f, h);
    out(0, 0) += 1e-3;
    return out;
  };
  CHECK(eigenfunction_residual(kernel, {1, 2}, 8, broken) > 1e-4);
}

TEST_CASE("wft_kernel") {
  const ComplexField2 dc = wft_kernel(5, 1.5, {0.0, 0.0});
  for (const auto& v : dc.values()) CHECK(v.imag() == 0.0);

  const std::size_t k = 7;
  const Freq2 u{pi / 4.0, pi / 4.0};
  const ComplexField2 w = wft_kernel(k, 2.0, u);
  const Field2 window = gaussian_window(grid_coords(k), 2.0);
  const Field2 real_part = gabor_kernel(k, {1.0, 0.0, u, 2.0});
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      const double x1 = oracle::centered(c, k);
      const double x2 = oracle::centered(r, k);
      const double g = std::exp(-(x1 * x1 + x2 * x2) / 4.0);
      const double theta = u.u1 * x1 + u.u2 * x2;
      CHECK(w(r, c).real() == doctest::Approx(g * std::cos(theta)).epsilon(1e-14));
      CHECK(w(r, c).imag() == doctest::Approx(g * std::sin(theta)).epsilon(1e-14));
      CHECK(std::abs(w(r, c)) == doctest::Approx(window(r, c)).epsilon(1e-15));
      CHECK(w(r, c).real() == real_part(r, c));
    }
  }
}

TEST_CASE("wft_shift_residual") {
  const std::size_t n = 32;
  const Field2 window = gaussian_window(grid_coords(9), 2.0);
  CHECK(wft_shift_residual(window, {0.0, 0.0}, n) < 1e-12);
  CHECK(wft_shift_residual(window, bin_frequency({8, 0}, n), n) < 1e-9);
  CHECK(wft_shift_residual(window, bin_frequency({5, 27}, n), n) < 1e-9);

  const Field2 delta(1, 1, {1.0});
  CHECK(wft_shift_residual(delta, bin_frequency({3, 11}, n), n) < 1e-10);

  CHECK_THROWS_AS(wft_shift_residual(window, {0.3, 0.0}, n), PreconditionError);
}

TEST_CASE("frequency bins and angle wrapping") {
  CHECK(bin_frequency({8, 0}, 32).u1 == doctest::Approx(pi / 2.0));
  CHECK(bin_frequency({24, 0}, 32).u1 == doctest::Approx(-pi / 2.0));
  CHECK(bin_frequency({16, 0}, 32).u1 == doctest::Approx(pi));
  const FreqIndex b = frequency_bin({-pi / 2.0, pi}, 32);
  CHECK(b.m1 == 24);
  CHECK(b.m2 == 16);

  CHECK(wrap_angle(pi) == doctest::Approx(pi));
  CHECK(wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  CHECK(wrap_angle(0.25) == 0.25);
}

TEST_CASE("Field2 rejects bad construction") {
  CHECK_THROWS_AS(Field2(0, 3), InvalidSizeError);
  CHECK_THROWS_AS(Field2(2, 2, {1.0, 2.0, 3.0}), SizeMismatchError);
  CHECK_THROWS_AS(Field2(1, 2, {1.0, INFINITY}), InvalidParameterError);
}
