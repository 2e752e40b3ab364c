#pragma once

#include <vector>

#include "flatpoly/solver.hpp"

namespace flatpoly::detail {

/// Rows of G f <= h scaled to unit gradient norm. Zero rows are split off:
/// they are either vacuous or make the problem infeasible on their own.
struct ScaledRows {
  Matrix G;                 ///< kept rows, unit norm
  Vector h;
  std::vector<int> source;  ///< original row of each kept row
  Vector norm;              ///< original norm of each kept row
  bool trivially_infeasible = false;

  int rows() const { return static_cast<int>(h.size()); }
};

ScaledRows scale_rows(const Matrix& G, const Vector& h, double tolerance);

struct SimplexOutcome {
  SolveStatus status = SolveStatus::Optimal;
  Vector x;
  int iterations = 0;
};

/// min c^T x s.t. A x <= b, x >= 0. With phase1_only, stops at the first
/// feasible vertex and ignores c.
SimplexOutcome simplex(const Matrix& A, const Vector& b, const Vector& c, int max_iterations, bool phase1_only);

std::vector<int> active_rows(const Matrix& G, const Vector& h, const Vector& f, double tolerance);

}  // namespace flatpoly::detail
