#pragma once

// Data-parallel inner loops shared by the solvers and the constraint
// verifier. Every kernel has a portable scalar reference implementation and,
// on x86-64, an AVX2/FMA variant. The dispatching entry points at namespace
// scope pick the widest variant the running CPU supports.

#include <cstddef>
#include <span>
#include <string_view>

namespace flatpoly::kernels {

enum class Isa { Scalar, Avx2 };

/// ISA selected for this process. Detected once; `FLATPOLY_SIMD=scalar`
/// in the environment forces the scalar path.
Isa active_isa();
std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);

/// Maximum of p(s) = sum_i coeffs[i] s^i over s_j = s0 + j*ds, j = 0..count-1.
/// Returns -inf for count == 0.
double poly_grid_max(std::span<const double> coeffs, double s0, double ds, std::size_t count);

/// out[j] = p(s[j]) by Horner's scheme.
void poly_eval(std::span<const double> coeffs, std::span<const double> s, std::span<double> out);

namespace scalar {
void axpy(double a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double poly_grid_max(std::span<const double> coeffs, double s0, double ds, std::size_t count);
void poly_eval(std::span<const double> coeffs, std::span<const double> s, std::span<double> out);
}  // namespace scalar

#if defined(FLATPOLY_HAVE_AVX2)
namespace avx2 {
void axpy(double a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double poly_grid_max(std::span<const double> coeffs, double s0, double ds, std::size_t count);
void poly_eval(std::span<const double> coeffs, std::span<const double> s, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace flatpoly::kernels
