#include "flatpoly/polyconstraint.hpp"

#include <spdlog/spdlog.h>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "flatpoly/errors.hpp"
#include "flatpoly/kernels.hpp"

namespace flatpoly {

LinearConstraintSpec normalize_constraint_spec(const LinearConstraintSpec& spec, int n, int m) {
  const int rows = spec.rows();
  if (spec.G_x.rows() != rows || spec.G_u.rows() != rows) {
    throw DimensionMismatch("constraint blocks G_x, G_u, g0 have inconsistent row counts");
  }
  if (rows > 0 && (spec.G_x.cols() != n || spec.G_u.cols() != m)) {
    throw DimensionMismatch("constraint blocks must be N_c x n and N_c x m");
  }
  std::vector<int> keep;
  for (int k = 0; k < rows; ++k) {
    const bool zero = spec.G_x.row(k).isZero(0.0) && spec.G_u.row(k).isZero(0.0);
    if (zero && spec.g0(k) <= 0.0) {
      spdlog::warn("constraint row {} is vacuous (0 <= {}) and was dropped", k, -spec.g0(k));
      continue;
    }
    keep.push_back(k);
  }
  LinearConstraintSpec out;
  out.G_x.resize(static_cast<Eigen::Index>(keep.size()), n);
  out.G_u.resize(static_cast<Eigen::Index>(keep.size()), m);
  out.g0.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.G_x.row(r) = spec.G_x.row(keep[i]);
    out.G_u.row(r) = spec.G_u.row(keep[i]);
    out.g0(r) = spec.g0(keep[i]);
  }
  return out;
}

Matrix sample_matrix(int degree) {
  if (degree < 1) throw DegreeOutOfRange("sample matrix needs N >= 1");
  Matrix q(degree, degree);
  for (int i = 1; i <= degree; ++i) {
    const double x = static_cast<double>(i) / degree;
    double p = 1.0;
    for (int j = 1; j <= degree; ++j) {
      p *= x;
      q(i - 1, j - 1) = p;
    }
  }
  return q;
}

namespace {

// eps(s) = -prod_{k=1..N} (1 - s N / k)
double epsilon(int n, double s) {
  double p = 1.0;
  for (int k = 1; k <= n; ++k) p *= 1.0 - s * n / k;
  return -p;
}

double epsilon_slope(int n, double s) {
  double sum = 0.0;
  for (int j = 1; j <= n; ++j) {
    double p = -static_cast<double>(n) / j;
    for (int k = 1; k <= n; ++k) {
      if (k != j) p *= 1.0 - s * n / k;
    }
    sum += p;
  }
  return -sum;
}

}  // namespace

EpsilonMaximum epsilon_supremum(int degree) {
  if (degree < 1) throw DegreeOutOfRange("delta is defined for N >= 1");
  constexpr int kGrid = 10000;
  EpsilonMaximum best{epsilon(degree, 0.0), 0.0};
  int best_j = 0;
  for (int j = 1; j <= kGrid; ++j) {
    const double s = static_cast<double>(j) / kGrid;
    const double v = epsilon(degree, s);
    if (v > best.value) {
      best = {v, s};
      best_j = j;
    }
  }
  // Polish on the sign change of eps' bracketing the grid maximum.
  const double lo0 = static_cast<double>(std::max(best_j - 1, 0)) / kGrid;
  const double hi0 = static_cast<double>(std::min(best_j + 1, kGrid)) / kGrid;
  double lo = lo0, hi = hi0;
  if (epsilon_slope(degree, lo) > 0.0 && epsilon_slope(degree, hi) < 0.0) {
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      (epsilon_slope(degree, mid) > 0.0 ? lo : hi) = mid;
    }
    const double s = 0.5 * (lo + hi);
    const double v = epsilon(degree, s);
    if (v > best.value) best = {v, s};
  }
  if (!(best.value > 0.0)) best.value = 0.0;  // also folds -0.0
  return best;
}

double compute_delta(int degree) {
  if (degree < 1 || degree > kMaxDegree) {
    throw DegreeOutOfRange("delta is tabulated for 1 <= N <= " + std::to_string(kMaxDegree) + ", got " +
                           std::to_string(degree));
  }
  static const std::array<double, kMaxDegree + 1> table = [] {
    std::array<double, kMaxDegree + 1> t{};
    for (int n = 1; n <= kMaxDegree; ++n) t[static_cast<std::size_t>(n)] = epsilon_supremum(n).value;
    return t;
  }();
  return table[static_cast<std::size_t>(degree)];
}

AffinePolyVector constraint_polynomials(const AffinePolyVector& states, const AffinePolyVector& inputs,
                                        const LinearConstraintSpec& spec) {
  if (spec.G_x.cols() != states.size() || spec.G_u.cols() != inputs.size() || spec.G_x.rows() != spec.rows() ||
      spec.G_u.rows() != spec.rows()) {
    throw DimensionMismatch("constraint matrices do not match the state/input parameterization");
  }
  AffinePolyVector out;
  out.role = PolyRole::Constraint;
  const int degree = std::max(states.degree(), inputs.degree());
  const int n_free = states.n_free();
  for (int k = 0; k < spec.rows(); ++k) {
    AffinePoly p(degree, n_free, states.horizon());
    for (int c = 0; c < states.size(); ++c) {
      if (spec.G_x(k, c) != 0.0) p += spec.G_x(k, c) * states[c];
    }
    for (int c = 0; c < inputs.size(); ++c) {
      if (spec.G_u(k, c) != 0.0) p += spec.G_u(k, c) * inputs[c];
    }
    p.add_constant(spec.g0(k));
    out.components.push_back(std::move(p));
  }
  return out;
}

AffineConstraintSet condition_constraints(const AffinePolyVector& states, const AffinePolyVector& inputs,
                                          const LinearConstraintSpec& spec, double horizon, double delta) {
  if (states.size() > 0 && std::abs(states.horizon() - horizon) > 1e-12 * horizon) {
    throw DimensionMismatch("constraint horizon differs from the parameterization horizon");
  }
  const auto polys = constraint_polynomials(states, inputs, spec);
  const int degree = polys.size() > 0 ? polys.degree() : states.degree();
  const int n_free = states.n_free();
  const int rows = spec.rows() * (degree + 1);

  AffineConstraintSet set;
  set.G.resize(rows, n_free);
  set.h.resize(rows);
  set.tags.reserve(static_cast<std::size_t>(rows));
  int r = 0;
  for (int k = 0; k < polys.size(); ++k) {
    const Eigen::RowVectorXd at0 = polys[k].affine_at(0.0);
    set.G.row(r) = at0.tail(n_free);
    set.h(r) = -at0(0);
    set.tags.push_back({k, 0});
    ++r;
    for (int p = 1; p <= degree; ++p) {
      const Eigen::RowVectorXd row = polys[k].affine_at(static_cast<double>(p) / degree) - delta * at0;
      set.G.row(r) = row.tail(n_free);
      set.h(r) = -row(0);
      set.tags.push_back({k, p});
      ++r;
    }
  }
  return set;
}

double verify_nonpositivity(const AffinePoly& poly, const Vector& alpha, double horizon, std::size_t grid_size) {
  if (grid_size < 1000) throw std::invalid_argument("verify_nonpositivity needs at least 1000 grid points");
  const Vector c = poly.resolve(alpha);
  const double span = horizon / poly.horizon();
  const double ds = span / static_cast<double>(grid_size - 1);
  return kernels::poly_grid_max({c.data(), static_cast<std::size_t>(c.size())}, 0.0, ds, grid_size);
}

}  // namespace flatpoly
