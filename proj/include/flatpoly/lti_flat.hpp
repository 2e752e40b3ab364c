#pragma once

#include <vector>

#include <Eigen/Dense>

namespace flatpoly {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative threshold on singular values used for every numerical rank
/// decision in this module.
inline constexpr double kRankTolerance = 1e-9;

/// x' = A x + B u + d with constant drift d.
///
/// Construction validates shapes only (n >= 1, 1 <= m <= n, B of full column
/// rank). Controllability is checked by the operations that need it, so an
/// uncontrollable pair can still be inspected with controllability_matrix().
class LtiSystem {
 public:
  LtiSystem(Matrix a, Matrix b, Vector drift = Vector());

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Vector& d() const { return d_; }
  int n() const { return static_cast<int>(a_.rows()); }
  int m() const { return static_cast<int>(b_.cols()); }

 private:
  Matrix a_;
  Matrix b_;
  Vector d_;
};

struct ControllabilityResult {
  Matrix matrix;  ///< [B, AB, ..., A^{n-1} B]
  int rank = 0;
};

ControllabilityResult controllability_matrix(const LtiSystem& sys);

/// Numerical rank with singular values above kRankTolerance * sigma_max.
int numerical_rank(const Matrix& m);

/// Controllability (Brunovsky) indices by greedy column selection in the
/// order b_1..b_m, A b_1..A b_m, ...  Throws UncontrollableSystem.
std::vector<int> brunovsky_indices(const LtiSystem& sys);

/// Controller-canonical parameterization of states and inputs by the flat
/// outputs y = C_f (x - x_off).
///
/// The canonical state z stacks, per output i, the chain
/// (y_i, y_i', ..., y_i^{(r_i - 1)}); `top` stacks the highest derivatives
/// y_i^{(r_i)}. Then
///   x = Xi_x z + x_off,
///   u = Xi_u_z z + Xi_u_top top + u_off.
/// (x_off, u_off) is an equilibrium of the drift: A x_off + B u_off + d = 0.
struct FlatMap {
  Matrix C_f;              ///< m x n
  std::vector<int> r;      ///< relative degrees, sum = n
  Matrix T_z;              ///< n x n, z = T_z (x - x_off)
  Matrix Xi_x;             ///< n x n, inverse of T_z
  Vector x_off;            ///< n
  Matrix Xi_u_z;           ///< m x n
  Matrix Xi_u_top;         ///< m x m
  Vector u_off;            ///< m

  int n() const { return static_cast<int>(T_z.rows()); }
  int m() const { return static_cast<int>(C_f.rows()); }
  int max_relative_degree() const;
  /// Position of y_i^{(k)} inside z.
  int chain_index(int output, int order) const;

  Vector chain_from_state(const Vector& x) const;
  Vector state_from_chain(const Vector& z) const;
  Vector input_from_chain(const Vector& z, const Vector& top) const;
};

FlatMap flat_transform(const LtiSystem& sys);

}  // namespace flatpoly
