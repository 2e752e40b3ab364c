#include "flatpoly/pipeline.hpp"

namespace flatpoly {

TrajectoryPlan condition_problem(const TrajectoryProblem& problem) {
  const double T = problem.cost.horizon;
  TrajectoryPlan plan;
  plan.flat = flat_transform(problem.system);
  plan.basis = apply_initial_conditions(plan.flat, problem.x0, problem.degree, T);
  plan.polys = parameterize_states_inputs(plan.flat, plan.basis);
  plan.cost = condition_cost(plan.polys.states, plan.polys.inputs, problem.cost);
  const auto spec = normalize_constraint_spec(problem.constraints, problem.system.n(), problem.system.m());
  plan.delta = compute_delta(problem.degree);
  plan.constraint_rows = condition_constraints(plan.polys.states, plan.polys.inputs, spec, T, plan.delta);
  plan.ldp = least_distance_transform(plan.cost, plan.constraint_rows);
  return plan;
}

SolveResult solve_plan(const TrajectoryPlan& plan, SolverKind kind, const QpOptions& qp, const LpOptions& lp) {
  switch (kind) {
    case SolverKind::QP:
      return solve_qp(plan.ldp, qp);
    case SolverKind::LP:
      return solve_lp(plan.ldp, lp);
    case SolverKind::Unconstrained:
      break;
  }
  return solve_unconstrained(plan.cost);
}

}  // namespace flatpoly
