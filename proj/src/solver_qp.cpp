#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "solver_internal.hpp"

namespace flatpoly {

namespace {

constexpr double kStepTolerance = 1e-12;
constexpr double kMultiplierTolerance = 1e-10;

double row_dot(const Matrix& G, int r, const Vector& v) {
  // G is column-major; a row is strided, so go through Eigen here.
  return G.row(r).dot(v);
}

// Keeps the rows of `candidates` that are linearly independent, in order.
std::vector<int> independent_subset(const Matrix& G, const std::vector<int>& candidates) {
  std::vector<int> kept;
  Matrix stacked(0, G.cols());
  for (int r : candidates) {
    Matrix trial(stacked.rows() + 1, G.cols());
    trial << stacked, G.row(r);
    Eigen::FullPivLU<Matrix> lu(trial);
    lu.setThreshold(1e-10);
    if (lu.rank() == trial.rows()) {
      stacked = std::move(trial);
      kept.push_back(r);
    }
    if (static_cast<int>(kept.size()) == G.cols()) break;
  }
  return kept;
}

struct EqualityStep {
  Vector f;   ///< min ||f|| s.t. G_W f = h_W
  Vector mu;  ///< f = G_W^T mu
};

EqualityStep equality_minimizer(const detail::ScaledRows& rows, const std::vector<int>& working, int nf) {
  EqualityStep out;
  if (working.empty()) {
    out.f = Vector::Zero(nf);
    out.mu.resize(0);
    return out;
  }
  Matrix Gw(static_cast<Eigen::Index>(working.size()), nf);
  Vector hw(static_cast<Eigen::Index>(working.size()));
  for (std::size_t i = 0; i < working.size(); ++i) {
    Gw.row(static_cast<Eigen::Index>(i)) = rows.G.row(working[i]);
    hw(static_cast<Eigen::Index>(i)) = rows.h(working[i]);
  }
  const Matrix gram = Gw * Gw.transpose();
  out.mu = gram.ldlt().solve(hw);
  out.f = Gw.transpose() * out.mu;
  return out;
}

bool feasible(const detail::ScaledRows& rows, const Vector& f, double tol) {
  for (int r = 0; r < rows.rows(); ++r) {
    if (row_dot(rows.G, r, f) - rows.h(r) > tol) return false;
  }
  return true;
}

std::vector<int> rows_active_at(const detail::ScaledRows& rows, const Vector& f, double tol) {
  std::vector<int> act;
  for (int r = 0; r < rows.rows(); ++r) {
    if (std::abs(row_dot(rows.G, r, f) - rows.h(r)) <= tol) act.push_back(r);
  }
  return act;
}

}  // namespace

SolveResult solve_qp(const LeastDistanceProblem& ldp, const QpOptions& options) {
  const int nf = ldp.n_free();
  SolveResult res;
  res.solver = SolverKind::QP;
  res.f = Vector::Zero(nf);
  res.multipliers = Vector::Zero(ldp.rows());

  const auto rows = detail::scale_rows(ldp.G, ldp.h, kFeasibilityTolerance);
  auto finish = [&]() {
    res.alpha = ldp.to_alpha(res.f);
    res.quadratic_cost = ldp.offset + res.f.squaredNorm();
    res.active_rows = detail::active_rows(ldp.G, ldp.h, res.f, 1e-7);
    return res;
  };
  if (rows.trivially_infeasible) {
    res.status = SolveStatus::Infeasible;
    return finish();
  }
  const int m = rows.rows();
  if (m == 0) return finish();

  const int max_it = options.max_iterations > 0 ? options.max_iterations : std::max(10, 10 * ldp.rows());

  // Map the warm-start hint from problem rows to kept rows.
  std::vector<int> working;
  Vector f;
  bool started = false;
  if (!options.warm_start.empty()) {
    std::vector<int> hint;
    for (int src : options.warm_start) {
      const auto it = std::find(rows.source.begin(), rows.source.end(), src);
      if (it != rows.source.end()) hint.push_back(static_cast<int>(it - rows.source.begin()));
    }
    std::sort(hint.begin(), hint.end());
    hint.erase(std::unique(hint.begin(), hint.end()), hint.end());
    working = independent_subset(rows.G, hint);
    const auto eq = equality_minimizer(rows, working, nf);
    if (feasible(rows, eq.f, kFeasibilityTolerance)) {
      f = eq.f;
      started = true;
    }
  }
  if (!started && (rows.h.array() >= -kFeasibilityTolerance).all()) {
    f = Vector::Zero(nf);
    working = independent_subset(rows.G, rows_active_at(rows, f, kFeasibilityTolerance));
    started = true;
  }
  if (!started) {
    Matrix A(m, 2 * nf);
    A << rows.G, -rows.G;
    const auto p1 = detail::simplex(A, rows.h, Vector::Zero(2 * nf), max_it, true);
    res.iterations += p1.iterations;
    if (p1.status != SolveStatus::Optimal) {
      res.status = p1.status;
      return finish();
    }
    f = p1.x.head(nf) - p1.x.tail(nf);
    working = independent_subset(rows.G, rows_active_at(rows, f, 1e-9));
  }

  Vector mult_scaled = Vector::Zero(m);
  while (true) {
    if (res.iterations >= max_it) {
      res.status = SolveStatus::IterationLimit;
      break;
    }
    const auto eq = equality_minimizer(rows, working, nf);
    const Vector p = eq.f - f;
    if (p.norm() <= kStepTolerance * (1.0 + f.norm())) {
      f = eq.f;
      // 2 f + G_W^T lambda = 0 with f = G_W^T mu  =>  lambda = -2 mu.
      int drop = -1;
      double most_negative = -kMultiplierTolerance;
      for (std::size_t i = 0; i < working.size(); ++i) {
        const double lambda = -2.0 * eq.mu(static_cast<Eigen::Index>(i));
        if (lambda < most_negative ||
            (drop >= 0 && lambda == most_negative && working[i] < working[static_cast<std::size_t>(drop)])) {
          most_negative = lambda;
          drop = static_cast<int>(i);
        }
      }
      if (drop < 0) {
        mult_scaled.setZero();
        for (std::size_t i = 0; i < working.size(); ++i) {
          mult_scaled(working[i]) = std::max(0.0, -2.0 * eq.mu(static_cast<Eigen::Index>(i)));
        }
        res.status = SolveStatus::Optimal;
        break;
      }
      working.erase(working.begin() + drop);
      ++res.iterations;
      continue;
    }

    // Longest feasible step toward the equality minimizer.
    double step = 1.0;
    int blocking = -1;
    for (int r = 0; r < m; ++r) {
      if (std::find(working.begin(), working.end(), r) != working.end()) continue;
      const double gp = row_dot(rows.G, r, p);
      if (gp <= kStepTolerance) continue;
      const double t = std::max(0.0, (rows.h(r) - row_dot(rows.G, r, f)) / gp);
      if (t < step - 1e-14 || (blocking >= 0 && std::abs(t - step) <= 1e-14 && r < blocking)) {
        step = t;
        blocking = r;
      }
    }
    f += step * p;
    if (blocking >= 0) working.push_back(blocking);
    ++res.iterations;
  }

  res.f = f;
  for (int i = 0; i < m; ++i) {
    res.multipliers(rows.source[static_cast<std::size_t>(i)]) = mult_scaled(i) / rows.norm(i);
  }
  if (res.status == SolveStatus::Optimal && !violated_rows(ldp.G, ldp.h, res.f).empty()) {
    spdlog::warn("QP solution violates a row beyond tolerance");
  }
  return finish();
}

}  // namespace flatpoly
