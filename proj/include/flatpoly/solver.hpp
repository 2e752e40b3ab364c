#pragma once

#include <string_view>
#include <vector>

#include "flatpoly/costcond.hpp"

namespace flatpoly {

enum class SolverKind { Unconstrained, QP, LP };
enum class SolveStatus { Optimal, Infeasible, IterationLimit, Unbounded };

std::string_view to_string(SolverKind kind);
std::string_view to_string(SolveStatus status);

/// Feasibility tolerance applied to rows scaled to unit gradient norm.
inline constexpr double kFeasibilityTolerance = 1e-8;

struct SolveResult {
  Vector alpha;
  Vector f;                   ///< least-distance coordinates
  double quadratic_cost = 0;  ///< J(alpha) = f^T f + J(alpha0)
  int iterations = 0;
  SolverKind solver = SolverKind::Unconstrained;
  SolveStatus status = SolveStatus::Optimal;
  std::vector<int> active_rows;  ///< rows of the least-distance problem at equality
  Vector multipliers;            ///< QP only: one per row, in the row scale of G

  bool optimal() const { return status == SolveStatus::Optimal; }
};

SolveResult solve_unconstrained(const ParameterizedCost& pc);

struct QpOptions {
  int max_iterations = 0;             ///< 0 selects 10 * rows (at least 10)
  std::vector<int> warm_start;        ///< working set hint, rows of the problem
};

/// Primal active-set method for min f^T f s.t. G f <= h. A feasible start
/// comes from the warm-start working set when it yields a feasible point and
/// from simplex phase 1 otherwise.
SolveResult solve_qp(const LeastDistanceProblem& ldp, const QpOptions& options = {});

struct LpOptions {
  int max_iterations = 0;  ///< 0 selects 10 * (rows + 2 n_free)
};

/// min sum(f_p + f_n) s.t. G (f_p - f_n) <= h, f_p, f_n >= 0 by a two-phase
/// dense-tableau simplex with Bland's rule.
SolveResult solve_lp(const LeastDistanceProblem& ldp, const LpOptions& options = {});

struct SuboptimalityReport {
  double j_lp = 0;     ///< J'
  double j0 = 0;       ///< unconstrained cost J(alpha0)
  double j_c = 0;      ///< extra cost of the QP solution
  double bound = 0;    ///< J0 + N' J_C
  bool holds = false;
};

SuboptimalityReport suboptimality_report(const SolveResult& qp, const SolveResult& lp, const ParameterizedCost& pc,
                                         double tolerance = 1e-8);

/// Rows of G f <= h violated by more than kFeasibilityTolerance after
/// scaling each row to unit norm. Zero rows count when h < -tolerance.
std::vector<int> violated_rows(const Matrix& G, const Vector& h, const Vector& f,
                               double tolerance = kFeasibilityTolerance);

}  // namespace flatpoly
