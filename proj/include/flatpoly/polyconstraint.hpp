#pragma once

#include <vector>

#include "flatpoly/polybasis.hpp"

namespace flatpoly {

/// G_x x(t) + G_u u(t) + g0 <= 0 on [0, T], one inequality per row.
struct LinearConstraintSpec {
  Matrix G_x;
  Matrix G_u;
  Vector g0;

  int rows() const { return static_cast<int>(g0.size()); }
};

/// Drops rows that are identically zero in G_x and G_u with g0 <= 0 (they
/// can never bind) and validates shapes against (n, m).
LinearConstraintSpec normalize_constraint_spec(const LinearConstraintSpec& spec, int n, int m);

/// Row tag of a conditioned inequality: constraint row and sample index p
/// (p = 0 is the t = 0 condition).
struct RowTag {
  int constraint = 0;
  int sample = 0;
};

/// G alpha <= h.
struct AffineConstraintSet {
  Matrix G;
  Vector h;
  std::vector<RowTag> tags;

  int rows() const { return static_cast<int>(h.size()); }
};

/// q_ij = (i/N)^j for i, j = 1..N.
Matrix sample_matrix(int degree);

/// sup over s in [0, 1] of eps(s) = -1 + s^T Q^{-1} 1 for 1 <= N <= kMaxDegree.
/// Values are cached per degree. Throws DegreeOutOfRange.
double compute_delta(int degree);

/// Supremum of eps on [0, 1] and its location, without the range check.
/// eps is the unique degree-N polynomial with eps(0) = -1 and eps(p/N) = 0,
/// so it is evaluated in product form; stable well past kMaxDegree.
struct EpsilonMaximum {
  double value = 0.0;
  double location = 0.0;
};
EpsilonMaximum epsilon_supremum(int degree);

/// Builds P_k(t) = (G_x Gamma_x + G_u Gamma_u + g0)_k as affine polynomials.
AffinePolyVector constraint_polynomials(const AffinePolyVector& states, const AffinePolyVector& inputs,
                                        const LinearConstraintSpec& spec);

/// Emits P_k(0) <= 0 and P_k(pT/N) - delta P_k(0) <= 0 for p = 1..N.
AffineConstraintSet condition_constraints(const AffinePolyVector& states, const AffinePolyVector& inputs,
                                          const LinearConstraintSpec& spec, double horizon, double delta);

/// max of P(t) over grid_size uniform points on [0, T] (end points included).
double verify_nonpositivity(const AffinePoly& poly, const Vector& alpha, double horizon, std::size_t grid_size);

}  // namespace flatpoly
