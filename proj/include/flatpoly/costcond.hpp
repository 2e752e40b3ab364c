#pragma once

#include <optional>

#include "flatpoly/polyconstraint.hpp"

namespace flatpoly {

/// J = int_0^T [(x - x_ref)^T Q (x - x_ref) + u^T R u + stage_offset] dt
///     + (x(T) - x_star)^T P (x(T) - x_star)
///
/// x_ref defaults to x_star. stage_offset carries the constant left over
/// when a general quadratic stage cost is completed to square form.
struct QuadraticCostSpec {
  Matrix Q;
  Matrix R;
  Matrix P;
  Vector x_star;
  std::optional<Vector> x_ref;
  double horizon = 1.0;
  double stage_offset = 0.0;

  const Vector& stage_reference() const { return x_ref ? *x_ref : x_star; }
};

/// J(alpha) = alpha^T K alpha + k^T alpha + k0
struct ParameterizedCost {
  Matrix K;
  Vector k;
  double k0 = 0.0;

  int n_free() const { return static_cast<int>(k.size()); }
  double value(const Vector& alpha) const;
  Vector gradient(const Vector& alpha) const { return 2.0 * K * alpha + k; }
};

/// W_ij = int_0^T t^i t^j dt = T^{i+j+1} / (i+j+1).
Matrix gram_weights(int degree, double horizon);

ParameterizedCost condition_cost(const AffinePolyVector& states, const AffinePolyVector& inputs,
                                 const QuadraticCostSpec& cost);

/// Upper-triangular F with F^T F = K. Throws NotPositiveDefinite with the
/// failing pivot.
Matrix assert_convexity(const ParameterizedCost& pc);

/// alpha0 = -K^{-1} k / 2.
Vector unconstrained_optimum(const ParameterizedCost& pc);

/// min f^T f + offset  s.t.  G f <= h, with alpha = alpha0 + F^{-1} f.
struct LeastDistanceProblem {
  Matrix F;
  Vector alpha0;
  double offset = 0.0;  ///< J(alpha0)
  Matrix G;
  Vector h;
  std::vector<RowTag> tags;

  int n_free() const { return static_cast<int>(alpha0.size()); }
  int rows() const { return static_cast<int>(h.size()); }
  Vector to_alpha(const Vector& f) const;
  Vector to_f(const Vector& alpha) const;
};

LeastDistanceProblem least_distance_transform(const ParameterizedCost& pc, const AffineConstraintSet& constraints);

}  // namespace flatpoly
