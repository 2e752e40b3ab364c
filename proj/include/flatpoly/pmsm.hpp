#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flatpoly/pipeline.hpp"

namespace flatpoly::pmsm {

/// Non-salient permanent-magnet synchronous machine. Defaults are the
/// 10 N.m / 314 rad/s test machine.
struct PmsmParams {
  double resistance = 0.86;        ///< R, ohm
  double inductance = 6e-3;        ///< L, H
  int pole_pairs = 3;              ///< n_p
  double flux = 0.236;             ///< K, V.s
  double iron_resistance = 1800.0; ///< R_m, ohm
  double current_max = 10.0;       ///< A
  double voltage_max = 330.0;      ///< V
  double rated_speed = 314.0;      ///< rad/s
  double rated_torque = 10.0;      ///< N.m

  /// tau = torque_constant() * i_q
  double torque_constant() const { return 1.5 * pole_pairs * flux; }
};

/// Piecewise-constant signal: `initial` before the first step, then the
/// value of the latest step whose time is <= t.
struct Schedule {
  double initial = 0.0;
  std::vector<std::pair<double, double>> steps;  ///< (time s, value)

  double at(double t) const;
};

struct Scenario {
  PmsmParams machine;
  double horizon = 2e-3;   ///< prediction horizon T, s
  double dt = 1e-4;        ///< sampling period, s
  double duration = 0.12;  ///< s
  Schedule speed_ref{0.0, {{0.01, 420.0}}};
  Schedule load_torque{0.0, {{0.07, 8.0}}};
  double q = 20.0;
  int degree = 5;
  double inertia = 5e-4;   ///< J_m, kg.m^2
  double friction = 1e-4;  ///< b, N.m.s
  double kp = 0.5;
  double ki = 20.0;
  double torque_limit = 10.0;
  /// Controller-side tightening of the state rows, in A. Absorbs the
  /// frozen-speed model error between samples.
  double state_backoff = 0.05;

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
};

/// Electrical subsystem at frozen speed: x = (i_d, i_q), u = (v_d, v_q).
LtiSystem pmsm_linearize(const PmsmParams& p, double omega);

/// Stage cost q (tau - tau_ref)^2 + R (i_d^2 + i_q^2) + |omega|/R_m ((L i_d + K)^2 + i_q^2)
/// completed to square form, plus q T (tau(T) - tau_ref)^2 at the end.
QuadraticCostSpec pmsm_cost(const PmsmParams& p, double q, double omega, double torque_ref, double horizon);

/// Rectangles inscribed in the current and voltage circles:
/// -I/2 <= i_d <= 0, |i_q| <= sqrt(3)/2 I, |v_d| <= V/2, |v_q| <= sqrt(3)/2 V.
LinearConstraintSpec pmsm_constraints(const PmsmParams& p);

/// State rows tightened by `backoff` (A); input rows unchanged.
LinearConstraintSpec controller_constraints(const LinearConstraintSpec& spec, double backoff);

/// Appends, for every state-only row of `spec`, the row evaluated at the
/// state reached after `dt` with u(0) held (exact discretization of the
/// frozen-speed model). Tagged with sample = -1. The least-distance
/// problem is not rebuilt.
void add_next_sample_rows(TrajectoryPlan& plan, const TrajectoryProblem& problem, double dt);

/// Rows that do not depend on alpha (state rows at t = 0, fixed by the
/// measured state) and are violated are relaxed to 0 <= 0. Returns the
/// number of rows relaxed; the least-distance problem is not rebuilt.
int relax_fixed_rows(AffineConstraintSet& rows);

/// Max violation of the linearized polytope by one applied sample (<= 0 when inside).
double polytope_violation(const PmsmParams& p, double i_d, double i_q, double v_d, double v_q);

struct PlantState {
  double i_d = 0.0;
  double i_q = 0.0;
  double omega = 0.0;
};

/// One RK4 step of the nonlinear electrical equations plus
/// J_m omega' = tau - tau_load - b omega. Throws NonFinite.
PlantState step_plant(const PlantState& state, double v_d, double v_q, double load, const Scenario& scenario,
                      double dt);

/// PI with conditional integration: the integrator is held while the
/// output saturates.
class PiSpeedController {
 public:
  PiSpeedController(double kp, double ki, double limit) : kp_(kp), ki_(ki), limit_(limit) {}

  double update(double reference, double measured, double dt);
  double integral() const { return integral_; }
  void reset() { integral_ = 0.0; }

 private:
  double kp_;
  double ki_;
  double limit_;
  double integral_ = 0.0;
};

struct TraceRow {
  double t = 0;
  double i_d = 0;
  double i_q = 0;
  double v_d = 0;
  double v_q = 0;
  double omega = 0;
  double torque = 0;
  double torque_ref = 0;
  double cost = 0;
  int iterations = 0;
  SolverKind solver = SolverKind::QP;
  std::string status;  ///< solve status; "fallback:<reason>" when the previous input was held
};

std::vector<TraceRow> run_closed_loop(const Scenario& scenario, SolverKind solver);

}  // namespace flatpoly::pmsm
