#pragma once

#include "flatpoly/solver.hpp"

namespace flatpoly {

/// Everything needed to generate one constrained trajectory.
struct TrajectoryProblem {
  LtiSystem system;
  QuadraticCostSpec cost;
  LinearConstraintSpec constraints;
  int degree = 5;
  Vector x0;
};

/// Intermediate products of one planning pass, kept for reporting and
/// for sampling the optimal trajectory.
struct TrajectoryPlan {
  FlatMap flat;
  BasisSpec basis;
  StateInputPolys polys;
  ParameterizedCost cost;
  AffineConstraintSet constraint_rows;
  LeastDistanceProblem ldp;
  double delta = 0.0;

  Vector state(const Vector& alpha, double t) const { return evaluate(polys.states, alpha, t); }
  Vector input(const Vector& alpha, double t) const { return evaluate(polys.inputs, alpha, t); }
};

/// Runs flat transform, basis, cost and constraint conditioning and the
/// least-distance transform. Throws the module errors unchanged.
TrajectoryPlan condition_problem(const TrajectoryProblem& problem);

/// Solves a conditioned plan. Without constraint rows every kind reduces to
/// the unconstrained optimum.
SolveResult solve_plan(const TrajectoryPlan& plan, SolverKind kind, const QpOptions& qp = {},
                       const LpOptions& lp = {});

}  // namespace flatpoly
