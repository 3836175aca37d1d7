#include <atomic>
#include <string>

#include "bandfit/error.hpp"
#include "bandfit/simd.hpp"

namespace bandfit::simd {
namespace {

Isa probe() {
#if defined(BANDFIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{probe()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
  return detected_isa() == Isa::avx2;
}

Isa detected_isa() {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw InvalidParameterError("instruction set '" + std::string(isa_name(isa)) +
                                "' is not supported by this CPU");
  }
  active().store(isa, std::memory_order_relaxed);
}

double gabor_rss(const GaborSamples& samples, const ParamVector& p) {
#if defined(BANDFIT_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::gabor_rss(samples, p);
#endif
  return scalar::gabor_rss(samples, p);
}

NormalEquations gabor_normal_equations(const GaborSamples& samples, const ParamVector& p) {
#if defined(BANDFIT_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::gabor_normal_equations(samples, p);
#endif
  return scalar::gabor_normal_equations(samples, p);
}

std::complex<double> complex_dot(std::span<const std::complex<double>> a,
                                 std::span<const std::complex<double>> b) {
#if defined(BANDFIT_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::complex_dot(a, b);
#endif
  return scalar::complex_dot(a, b);
}

}  // namespace bandfit::simd
