#pragma once

#include <vector>

#include "flatpoly/lti_flat.hpp"

namespace flatpoly {

/// Highest polynomial degree accepted anywhere in the library. Power series
/// beyond this are numerically unreliable.
inline constexpr int kMaxDegree = 15;

/// Polynomial in time whose coefficients are affine in a free parameter
/// vector alpha:
///
///   p(t) = sum_i (c_i0 + c_i . alpha) (t / horizon)^i
///
/// Coefficients are stored against the normalized time s = t / horizon so
/// that they stay O(1) for millisecond horizons. Row i of coeffs() holds
/// power i; column 0 is the offset c_i0, columns 1..n_free the gradient c_i.
class AffinePoly {
 public:
  AffinePoly() = default;
  AffinePoly(int degree, int n_free, double horizon);
  AffinePoly(Matrix coeffs, double horizon);

  int degree() const { return static_cast<int>(coeffs_.rows()) - 1; }
  int n_free() const { return static_cast<int>(coeffs_.cols()) - 1; }
  double horizon() const { return horizon_; }
  const Matrix& coeffs() const { return coeffs_; }
  Matrix& coeffs() { return coeffs_; }

  /// Normalized-time coefficients with alpha substituted.
  Vector resolve(const Vector& alpha) const;
  /// Affine form at normalized time s: row vector [offset, gradient...].
  Eigen::RowVectorXd affine_at(double s) const;

  bool outside_horizon(double t) const { return t < 0.0 || t > horizon_; }

  /// d/dt; the storage degree is kept (top row becomes zero).
  AffinePoly derivative() const;
  /// Antiderivative in t with zero constant. Grows the storage by one
  /// degree unless the top row is already zero.
  AffinePoly integral() const;

  AffinePoly& operator+=(const AffinePoly& other);
  AffinePoly& operator*=(double s);
  void add_constant(double c) { coeffs_(0, 0) += c; }

 private:
  Matrix coeffs_;
  double horizon_ = 1.0;
};

AffinePoly operator+(AffinePoly a, const AffinePoly& b);
AffinePoly operator*(double s, AffinePoly a);

enum class PolyRole { State, Input, Constraint, Output };

struct AffinePolyVector {
  std::vector<AffinePoly> components;
  PolyRole role = PolyRole::Output;

  int size() const { return static_cast<int>(components.size()); }
  const AffinePoly& operator[](int i) const { return components[static_cast<std::size_t>(i)]; }
  AffinePoly& operator[](int i) { return components[static_cast<std::size_t>(i)]; }
  int degree() const { return components.empty() ? 0 : components.front().degree(); }
  int n_free() const { return components.empty() ? 0 : components.front().n_free(); }
  double horizon() const { return components.empty() ? 1.0 : components.front().horizon(); }
};

/// Degree, horizon, relative degrees and the coefficients pinned by x(0).
struct BasisSpec {
  int degree = 0;
  double horizon = 1.0;
  std::vector<int> r;
  std::vector<Vector> fixed;  ///< per output: alpha_{i0..i,r_i-1}
  int n_free = 0;             ///< m (N + 1) - n

  int m() const { return static_cast<int>(r.size()); }
  /// Index of alpha_{ij} (j >= r_i) inside the free vector.
  int free_index(int output, int power) const;
};

BasisSpec apply_initial_conditions(const FlatMap& flat, const Vector& x0, int degree, double horizon);

/// derivs[k] holds the k-th time derivative of the m flat outputs, for
/// k = 0..max r_i.
std::vector<AffinePolyVector> parameterize_outputs(const BasisSpec& basis);

struct StateInputPolys {
  AffinePolyVector states;  ///< Gamma_x
  AffinePolyVector inputs;  ///< Gamma_u
};

StateInputPolys parameterize_states_inputs(const FlatMap& flat, const BasisSpec& basis);

double evaluate(const AffinePoly& poly, const Vector& alpha, double t);
Vector evaluate(const AffinePolyVector& polys, const Vector& alpha, double t);

}  // namespace flatpoly
