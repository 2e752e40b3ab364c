#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "flatpoly/kernels.hpp"
#include "solver_internal.hpp"

namespace flatpoly {
namespace detail {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTolerance = 1e-9;
constexpr double kReducedCostTolerance = 1e-10;

// Dense tableau: rows 0..m-1 constraints, row m reduced costs; last column
// holds the right-hand side (and -objective in the cost row).
class Tableau {
 public:
  Tableau(int rows, int vars) : t_(RowMajor::Zero(rows + 1, vars + 1)), basis_(static_cast<std::size_t>(rows), -1) {}

  int rows() const { return static_cast<int>(t_.rows()) - 1; }
  int vars() const { return static_cast<int>(t_.cols()) - 1; }
  double& at(int r, int c) { return t_(r, c); }
  double at(int r, int c) const { return t_(r, c); }
  double rhs(int r) const { return t_(r, vars()); }
  double& rhs(int r) { return t_(r, vars()); }
  int& basis(int r) { return basis_[static_cast<std::size_t>(r)]; }
  int basis(int r) const { return basis_[static_cast<std::size_t>(r)]; }
  double objective() const { return -t_(rows(), vars()); }

  std::span<double> row(int r) { return {t_.row(r).data(), static_cast<std::size_t>(t_.cols())}; }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / t_(pr, pc);
    t_.row(pr) *= inv;
    t_(pr, pc) = 1.0;
    const std::span<const double> prow(t_.row(pr).data(), static_cast<std::size_t>(t_.cols()));
    for (int r = 0; r <= rows(); ++r) {
      if (r == pr) continue;
      const double factor = t_(r, pc);
      if (factor == 0.0) continue;
      kernels::axpy(-factor, prow, row(r));
      t_(r, pc) = 0.0;
    }
    basis(pr) = pc;
  }

  // Cost row := c - sum_i c_{B_i} row_i.
  void set_costs(const Vector& c) {
    t_.row(rows()).setZero();
    t_.row(rows()).head(c.size()) = c.transpose();
    const std::span<double> cost = row(rows());
    for (int r = 0; r < rows(); ++r) {
      const int b = basis(r);
      if (b < c.size() && c(b) != 0.0) {
        kernels::axpy(-c(b), {t_.row(r).data(), static_cast<std::size_t>(t_.cols())}, cost);
      }
    }
  }

  // Bland's rule: first improving column, then minimum ratio with ties
  // broken by the smallest basic variable index.
  int entering(int allowed_vars) const {
    for (int j = 0; j < allowed_vars; ++j) {
      if (t_(rows(), j) < -kReducedCostTolerance) return j;
    }
    return -1;
  }

  int leaving(int col) const {
    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows(); ++r) {
      const double a = t_(r, col);
      if (a <= kPivotTolerance) continue;
      const double ratio = std::max(rhs(r), 0.0) / a;
      const double tie = 1e-12 * std::max(1.0, std::abs(best_ratio));
      if (best < 0 || ratio < best_ratio - tie ||
          (std::abs(ratio - best_ratio) <= tie && basis(r) < basis(best))) {
        best = r;
        best_ratio = ratio;
      }
    }
    return best;
  }

 private:
  RowMajor t_;
  std::vector<int> basis_;
};

enum class RunResult { Optimal, Unbounded, IterationLimit };

RunResult run(Tableau& tab, int allowed_vars, int& iterations, int max_iterations) {
  while (true) {
    const int col = tab.entering(allowed_vars);
    if (col < 0) return RunResult::Optimal;
    const int row = tab.leaving(col);
    if (row < 0) return RunResult::Unbounded;
    if (iterations >= max_iterations) return RunResult::IterationLimit;
    tab.pivot(row, col);
    ++iterations;
  }
}

}  // namespace

// Phase 1 is the single-auxiliary form: min x0 s.t. A x - x0 1 + s = b.
// One pivot of x0 into the most negative row makes the basis feasible.
SimplexOutcome simplex(const Matrix& A, const Vector& b, const Vector& c, int max_iterations, bool phase1_only) {
  const int m = static_cast<int>(A.rows());
  const int nx = static_cast<int>(A.cols());
  const int slack0 = nx;
  const int aux = nx + m;

  Tableau tab(m, nx + m + 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < nx; ++j) tab.at(i, j) = A(i, j);
    tab.at(i, slack0 + i) = 1.0;
    tab.at(i, aux) = -1.0;
    tab.rhs(i) = b(i);
    tab.basis(i) = slack0 + i;
  }

  SimplexOutcome out;
  auto extract = [&] {
    out.x = Vector::Zero(nx);
    for (int r = 0; r < m; ++r) {
      if (tab.basis(r) < nx) out.x(tab.basis(r)) = std::max(tab.rhs(r), 0.0);
    }
  };

  Eigen::Index worst = 0;
  if (m > 0 && b.minCoeff(&worst) < 0.0) {
    Vector phase1 = Vector::Zero(nx + m + 1);
    phase1(aux) = 1.0;
    tab.set_costs(phase1);
    tab.pivot(static_cast<int>(worst), aux);
    ++out.iterations;
    const RunResult r1 = run(tab, nx + m + 1, out.iterations, max_iterations);
    if (r1 == RunResult::IterationLimit) {
      out.status = SolveStatus::IterationLimit;
      extract();
      return out;
    }
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (tab.objective() > 1e-9 * scale) {
      out.status = SolveStatus::Infeasible;
      extract();
      return out;
    }
    // x0 may stay basic at level zero; swap it for any usable column.
    for (int r = 0; r < m; ++r) {
      if (tab.basis(r) != aux) continue;
      for (int j = 0; j < aux; ++j) {
        if (std::abs(tab.at(r, j)) > kPivotTolerance) {
          tab.pivot(r, j);
          break;
        }
      }
    }
  }

  if (phase1_only) {
    extract();
    out.status = SolveStatus::Optimal;
    return out;
  }

  Vector phase2 = Vector::Zero(nx + m + 1);
  phase2.head(nx) = c;
  tab.set_costs(phase2);
  const RunResult r2 = run(tab, aux, out.iterations, max_iterations);
  extract();
  switch (r2) {
    case RunResult::Optimal:
      out.status = SolveStatus::Optimal;
      break;
    case RunResult::Unbounded:
      out.status = SolveStatus::Unbounded;
      break;
    case RunResult::IterationLimit:
      out.status = SolveStatus::IterationLimit;
      break;
  }
  return out;
}

}  // namespace detail

SolveResult solve_lp(const LeastDistanceProblem& ldp, const LpOptions& options) {
  const int nf = ldp.n_free();
  SolveResult res;
  res.solver = SolverKind::LP;
  res.f = Vector::Zero(nf);

  const auto rows = detail::scale_rows(ldp.G, ldp.h, kFeasibilityTolerance);
  if (rows.trivially_infeasible) {
    res.status = SolveStatus::Infeasible;
  } else if (rows.rows() > 0) {
    Matrix A(rows.rows(), 2 * nf);
    A << rows.G, -rows.G;
    const Vector c = Vector::Ones(2 * nf);
    const int max_it = options.max_iterations > 0 ? options.max_iterations : 10 * (rows.rows() + 2 * nf);
    const auto out = detail::simplex(A, rows.h, c, max_it, false);
    res.iterations = out.iterations;
    res.status = out.status;
    res.f = out.x.head(nf) - out.x.tail(nf);
    if (res.status == SolveStatus::Optimal && !violated_rows(ldp.G, ldp.h, res.f).empty()) {
      spdlog::warn("LP vertex violates a row beyond tolerance after extraction");
    }
  }
  res.alpha = ldp.to_alpha(res.f);
  res.quadratic_cost = ldp.offset + res.f.squaredNorm();
  res.active_rows = detail::active_rows(ldp.G, ldp.h, res.f, 1e-7);
  return res;
}

}  // namespace flatpoly
