// AVX2+FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered through the dispatcher.

#include <immintrin.h>

#include <cmath>

#include "bandfit/simd.hpp"

namespace bandfit::simd::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

// Integer value of a vector of rounded doubles (|q| < 2^51), as int64 lanes.
inline __m256i round_to_int(__m256d q) {
  const __m256d magic = set1(0x1.8p52);
  return _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(q, magic)),
                          _mm256_castpd_si256(magic));
}

// exp(x) with Cody-Waite reduction by ln 2 and a degree-13 Taylor polynomial
// on |r| <= ln(2)/2. Arguments are clamped to [-700, 700].
inline __m256d vexp(__m256d x) {
  x = _mm256_max_pd(_mm256_min_pd(x, set1(700.0)), set1(-700.0));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, set1(1.4426950408889634074)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, set1(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(n, set1(1.90821492927058770002e-10), r);

  __m256d p = set1(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, set1(0.5));
  p = _mm256_fmadd_pd(p, r, set1(1.0));
  p = _mm256_fmadd_pd(p, r, set1(1.0));

  const __m256i biased = _mm256_add_epi64(round_to_int(n), _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
  return _mm256_mul_pd(p, scale);
}

// sin and cos together. Reduction by pi/2 in three parts, Taylor polynomials
// on |r| <= pi/4. Exactly odd/even in x.
inline void vsincos(__m256d x, __m256d& sin_out, __m256d& cos_out) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, set1(0.63661977236758134308)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(q, set1(1.57079632673412561417e+00), x);
  r = _mm256_fnmadd_pd(q, set1(6.07710050630396597660e-11), r);
  r = _mm256_fnmadd_pd(q, set1(2.02226624871116645580e-21), r);
  const __m256d r2 = _mm256_mul_pd(r, r);

  __m256d s = set1(1.0 / 355687428096000.0);
  s = _mm256_fmadd_pd(s, r2, set1(-1.0 / 1307674368000.0));
  s = _mm256_fmadd_pd(s, r2, set1(1.0 / 6227020800.0));
  s = _mm256_fmadd_pd(s, r2, set1(-1.0 / 39916800.0));
  s = _mm256_fmadd_pd(s, r2, set1(1.0 / 362880.0));
  s = _mm256_fmadd_pd(s, r2, set1(-1.0 / 5040.0));
  s = _mm256_fmadd_pd(s, r2, set1(1.0 / 120.0));
  s = _mm256_fmadd_pd(s, r2, set1(-1.0 / 6.0));
  s = _mm256_fmadd_pd(_mm256_mul_pd(s, r2), r, r);

  __m256d c = set1(1.0 / 6402373705728000.0);
  c = _mm256_fmadd_pd(c, r2, set1(-1.0 / 20922789888000.0));
  c = _mm256_fmadd_pd(c, r2, set1(1.0 / 87178291200.0));
  c = _mm256_fmadd_pd(c, r2, set1(-1.0 / 479001600.0));
  c = _mm256_fmadd_pd(c, r2, set1(1.0 / 3628800.0));
  c = _mm256_fmadd_pd(c, r2, set1(-1.0 / 40320.0));
  c = _mm256_fmadd_pd(c, r2, set1(1.0 / 720.0));
  c = _mm256_fmadd_pd(c, r2, set1(-1.0 / 24.0));
  c = _mm256_fmadd_pd(c, r2, set1(0.5));
  c = _mm256_fnmadd_pd(c, r2, set1(1.0));

  const __m256i qi = round_to_int(q);
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d odd = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(qi, one), one));
  const __m256d sin_sign = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_and_si256(qi, two), 62));
  const __m256d cos_sign = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(qi, one), two), 62));

  sin_out = _mm256_xor_pd(_mm256_blendv_pd(s, c, odd), sin_sign);
  cos_out = _mm256_xor_pd(_mm256_blendv_pd(c, s, odd), cos_sign);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256i tail_mask(std::size_t remaining) {
  const __m256i lane = _mm256_setr_epi64x(0, 1, 2, 3);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(remaining)), lane);
}

struct Lanes {
  __m256d x1, x2, data, valid;
};

inline Lanes load(const GaborSamples& s, std::size_t i) {
  const std::size_t n = s.data.size();
  if (i + kLanes <= n) {
    return {_mm256_loadu_pd(&s.x1[i]), _mm256_loadu_pd(&s.x2[i]), _mm256_loadu_pd(&s.data[i]),
            _mm256_castsi256_pd(_mm256_set1_epi64x(-1))};
  }
  const __m256i m = tail_mask(n - i);
  return {_mm256_maskload_pd(&s.x1[i], m), _mm256_maskload_pd(&s.x2[i], m),
          _mm256_maskload_pd(&s.data[i], m), _mm256_castsi256_pd(m)};
}

}  // namespace

double gabor_rss(const GaborSamples& s, const ParamVector& p) {
  const __m256d amplitude = set1(p[0]);
  const __m256d phase = set1(p[1]);
  const __m256d u1 = set1(p[2]);
  const __m256d u2 = set1(p[3]);
  const __m256d neg_inv_s2 = set1(-1.0 / (p[4] * p[4]));

  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < s.data.size(); i += kLanes) {
    const Lanes l = load(s, i);
    const __m256d r2 = _mm256_fmadd_pd(l.x1, l.x1, _mm256_mul_pd(l.x2, l.x2));
    const __m256d g = vexp(_mm256_mul_pd(r2, neg_inv_s2));
    const __m256d theta = _mm256_fmadd_pd(u1, l.x1, _mm256_fmadd_pd(u2, l.x2, phase));
    __m256d sn, c;
    vsincos(theta, sn, c);
    const __m256d model = _mm256_mul_pd(_mm256_mul_pd(amplitude, g), c);
    const __m256d r = _mm256_and_pd(_mm256_sub_pd(l.data, model), l.valid);
    acc = _mm256_fmadd_pd(r, r, acc);
  }
  return hsum(acc);
}

NormalEquations gabor_normal_equations(const GaborSamples& s, const ParamVector& p) {
  const __m256d amplitude = set1(p[0]);
  const __m256d phase = set1(p[1]);
  const __m256d u1 = set1(p[2]);
  const __m256d u2 = set1(p[3]);
  const double inv_s2 = 1.0 / (p[4] * p[4]);
  const __m256d neg_inv_s2 = set1(-inv_s2);
  const __m256d dsigma_scale = set1(2.0 * inv_s2 / p[4]);

  __m256d jtj[15];
  __m256d jtr[5];
  for (auto& v : jtj) v = _mm256_setzero_pd();
  for (auto& v : jtr) v = _mm256_setzero_pd();
  __m256d rss = _mm256_setzero_pd();

  for (std::size_t i = 0; i < s.data.size(); i += kLanes) {
    const Lanes l = load(s, i);
    const __m256d r2 = _mm256_fmadd_pd(l.x1, l.x1, _mm256_mul_pd(l.x2, l.x2));
    const __m256d g = vexp(_mm256_mul_pd(r2, neg_inv_s2));
    const __m256d theta = _mm256_fmadd_pd(u1, l.x1, _mm256_fmadd_pd(u2, l.x2, phase));
    __m256d sn, c;
    vsincos(theta, sn, c);
    const __m256d model = _mm256_mul_pd(_mm256_mul_pd(amplitude, g), c);
    const __m256d r = _mm256_and_pd(_mm256_sub_pd(l.data, model), l.valid);
    const __m256d ags = _mm256_and_pd(
        _mm256_xor_pd(_mm256_mul_pd(_mm256_mul_pd(amplitude, g), sn), set1(-0.0)), l.valid);

    const __m256d j[5] = {
        _mm256_and_pd(_mm256_mul_pd(g, c), l.valid),
        ags,
        _mm256_mul_pd(ags, l.x1),
        _mm256_mul_pd(ags, l.x2),
        _mm256_and_pd(_mm256_mul_pd(_mm256_mul_pd(model, r2), dsigma_scale), l.valid),
    };
    int slot = 0;
    for (int a = 0; a < 5; ++a) {
      jtr[a] = _mm256_fmadd_pd(j[a], r, jtr[a]);
      for (int b = a; b < 5; ++b, ++slot) jtj[slot] = _mm256_fmadd_pd(j[a], j[b], jtj[slot]);
    }
    rss = _mm256_fmadd_pd(r, r, rss);
  }

  NormalEquations ne;
  int slot = 0;
  for (int a = 0; a < 5; ++a) {
    ne.jtr[a] = hsum(jtr[a]);
    for (int b = a; b < 5; ++b, ++slot) {
      ne.jtj[a * 5 + b] = hsum(jtj[slot]);
      ne.jtj[b * 5 + a] = ne.jtj[a * 5 + b];
    }
  }
  ne.rss = hsum(rss);
  return ne;
}

std::complex<double> complex_dot(std::span<const std::complex<double>> a,
                                 std::span<const std::complex<double>> b) {
  const std::size_t n = std::min(a.size(), b.size());
  const auto* pa = reinterpret_cast<const double*>(a.data());
  const auto* pb = reinterpret_cast<const double*>(b.data());

  // Lanes hold (re, im) pairs of two complex numbers. `direct` collects
  // (ar*br, ai*bi), `crossed` collects (ar*bi, ai*br).
  __m256d direct = _mm256_setzero_pd();
  __m256d crossed = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    direct = _mm256_fmadd_pd(va, vb, direct);
    crossed = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), crossed);
  }
  alignas(32) double d[4];
  alignas(32) double x[4];
  _mm256_store_pd(d, direct);
  _mm256_store_pd(x, crossed);
  double re = (d[0] + d[2]) - (d[1] + d[3]);
  double im = (x[0] + x[2]) + (x[1] + x[3]);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

}  // namespace bandfit::simd::avx2
