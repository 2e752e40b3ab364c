#include <algorithm>
#include <cassert>
#include <limits>

#include "flatpoly/kernels.hpp"

namespace flatpoly::kernels::scalar {

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

namespace {
inline double horner(std::span<const double> c, double s) {
  if (c.empty()) return 0.0;
  double v = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) v = v * s + c[i];
  return v;
}
}  // namespace

double poly_grid_max(std::span<const double> coeffs, double s0, double ds, std::size_t count) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < count; ++j) {
    best = std::max(best, horner(coeffs, s0 + static_cast<double>(j) * ds));
  }
  return best;
}

void poly_eval(std::span<const double> coeffs, std::span<const double> s, std::span<double> out) {
  assert(s.size() == out.size());
  for (std::size_t j = 0; j < s.size(); ++j) out[j] = horner(coeffs, s[j]);
}

}  // namespace flatpoly::kernels::scalar
