#include "flatpoly/solver.hpp"

#include <cmath>

#include "solver_internal.hpp"

namespace flatpoly {

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Unconstrained:
      return "unconstrained";
    case SolverKind::QP:
      return "qp";
    case SolverKind::LP:
      return "lp";
  }
  return "unknown";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::IterationLimit:
      return "iteration_limit";
    case SolveStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

SolveResult solve_unconstrained(const ParameterizedCost& pc) {
  SolveResult res;
  res.solver = SolverKind::Unconstrained;
  res.alpha = unconstrained_optimum(pc);
  res.f = Vector::Zero(pc.n_free());
  res.quadratic_cost = pc.value(res.alpha);
  return res;
}

SuboptimalityReport suboptimality_report(const SolveResult& qp, const SolveResult& lp, const ParameterizedCost& pc,
                                         double tolerance) {
  SuboptimalityReport rep;
  rep.j0 = pc.value(unconstrained_optimum(pc));
  // Squared distances are exact in f; costs in alpha would cancel badly.
  rep.j_c = qp.f.squaredNorm();
  rep.j_lp = rep.j0 + lp.f.squaredNorm();
  rep.bound = rep.j0 + static_cast<double>(pc.n_free()) * rep.j_c;
  rep.holds = lp.f.squaredNorm() <= static_cast<double>(pc.n_free()) * rep.j_c + tolerance;
  return rep;
}

std::vector<int> violated_rows(const Matrix& G, const Vector& h, const Vector& f, double tolerance) {
  std::vector<int> out;
  for (int r = 0; r < static_cast<int>(h.size()); ++r) {
    const double nrm = G.row(r).norm();
    const double slack = G.row(r).dot(f) - h(r);
    if (slack > tolerance * (nrm > 0.0 ? nrm : 1.0)) out.push_back(r);
  }
  return out;
}

namespace detail {

ScaledRows scale_rows(const Matrix& G, const Vector& h, double tolerance) {
  ScaledRows out;
  const int m = static_cast<int>(h.size());
  std::vector<int> keep;
  std::vector<double> norms;
  for (int r = 0; r < m; ++r) {
    const double nrm = G.row(r).norm();
    if (nrm <= 1e-14) {
      if (h(r) < -tolerance) out.trivially_infeasible = true;
      continue;
    }
    keep.push_back(r);
    norms.push_back(nrm);
  }
  const auto k = static_cast<Eigen::Index>(keep.size());
  out.G.resize(k, G.cols());
  out.h.resize(k);
  out.norm.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double nrm = norms[static_cast<std::size_t>(i)];
    out.G.row(i) = G.row(keep[static_cast<std::size_t>(i)]) / nrm;
    out.h(i) = h(keep[static_cast<std::size_t>(i)]) / nrm;
    out.norm(i) = nrm;
  }
  out.source = std::move(keep);
  return out;
}

std::vector<int> active_rows(const Matrix& G, const Vector& h, const Vector& f, double tolerance) {
  std::vector<int> out;
  for (int r = 0; r < static_cast<int>(h.size()); ++r) {
    const double nrm = G.row(r).norm();
    if (nrm <= 1e-14) continue;
    if (std::abs(G.row(r).dot(f) - h(r)) <= tolerance * nrm) out.push_back(r);
  }
  return out;
}

}  // namespace detail
}  // namespace flatpoly
