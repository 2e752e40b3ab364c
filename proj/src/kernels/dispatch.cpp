#include <cstdlib>
#include <string_view>

#include "flatpoly/kernels.hpp"

namespace flatpoly::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(FLATPOLY_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("FLATPOLY_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar" || v == "off" || v == "0") return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return cpu_has_avx2();
  }
  return false;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

#if defined(FLATPOLY_HAVE_AVX2)
#define FLATPOLY_DISPATCH(fn, ...)                                   \
  (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define FLATPOLY_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void axpy(double a, std::span<const double> x, std::span<double> y) {
  FLATPOLY_DISPATCH(axpy, a, x, y);
}

double dot(std::span<const double> x, std::span<const double> y) {
  return FLATPOLY_DISPATCH(dot, x, y);
}

double poly_grid_max(std::span<const double> coeffs, double s0, double ds, std::size_t count) {
  return FLATPOLY_DISPATCH(poly_grid_max, coeffs, s0, ds, count);
}

void poly_eval(std::span<const double> coeffs, std::span<const double> s, std::span<double> out) {
  FLATPOLY_DISPATCH(poly_eval, coeffs, s, out);
}

#undef FLATPOLY_DISPATCH

}  // namespace flatpoly::kernels
