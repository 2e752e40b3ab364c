#include "flatpoly/pmsm.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "flatpoly/errors.hpp"

namespace flatpoly::pmsm {

namespace {
constexpr double kHalfSqrt3 = 0.86602540378443864676;
}

double Schedule::at(double t) const {
  double v = initial;
  for (const auto& [time, value] : steps) {
    if (time <= t) v = value;
  }
  return v;
}

void Scenario::validate() const {
  const auto& m = machine;
  if (!(m.resistance > 0 && m.inductance > 0 && m.pole_pairs > 0 && m.flux > 0 && m.iron_resistance > 0 &&
        m.current_max > 0 && m.voltage_max > 0 && m.rated_speed > 0 && m.rated_torque > 0)) {
    throw ConfigError("machine parameters must be strictly positive");
  }
  if (!(horizon > 0) || !(dt > 0) || dt > horizon) throw ConfigError("need 0 < dt <= horizon");
  if (!(duration >= 0)) throw ConfigError("duration must be non-negative");
  if (!(q > 0)) throw ConfigError("cost weight q must be positive");
  if (!(inertia > 0) || friction < 0) throw ConfigError("need inertia > 0 and friction >= 0");
  if (!(torque_limit > 0)) throw ConfigError("torque limit must be positive");
  if (!(state_backoff >= 0)) throw ConfigError("state back-off must be non-negative");
  if (degree < 1 || degree > kMaxDegree) throw ConfigError("polynomial degree out of range");
}

LtiSystem pmsm_linearize(const PmsmParams& p, double omega) {
  if (std::abs(omega) > 2.0 * p.rated_speed) {
    throw std::invalid_argument("linearization speed exceeds twice the rated speed");
  }
  const double a = -p.resistance / p.inductance;
  const double w = p.pole_pairs * omega;
  Matrix A(2, 2);
  A << a, w, -w, a;
  Matrix B = Matrix::Identity(2, 2) / p.inductance;
  Vector d(2);
  d << 0.0, -w * p.flux / p.inductance;
  return LtiSystem(std::move(A), std::move(B), std::move(d));
}

QuadraticCostSpec pmsm_cost(const PmsmParams& p, double q, double omega, double torque_ref, double horizon) {
  const double c = p.torque_constant();
  const double w = std::abs(omega) / p.iron_resistance;
  const double L = p.inductance;
  const double K = p.flux;

  // Expanded stage cost: Q_dd i_d^2 + Q_qq i_q^2 + l_d i_d + l_q i_q + const
  const double q_dd = p.resistance + w * L * L;
  const double q_qq = q * c * c + p.resistance + w;
  const double l_d = 2.0 * w * L * K;
  const double l_q = -2.0 * q * c * torque_ref;
  const double constant = q * torque_ref * torque_ref + w * K * K;

  QuadraticCostSpec cost;
  cost.horizon = horizon;
  cost.Q = Matrix::Zero(2, 2);
  cost.Q(0, 0) = q_dd;
  cost.Q(1, 1) = q_qq;
  Vector x_ref(2);
  x_ref << -l_d / (2.0 * q_dd), -l_q / (2.0 * q_qq);
  cost.stage_offset = constant - (q_dd * x_ref(0) * x_ref(0) + q_qq * x_ref(1) * x_ref(1));
  cost.x_ref = x_ref;
  cost.R = Matrix::Zero(2, 2);
  cost.P = Matrix::Zero(2, 2);
  cost.P(1, 1) = q * horizon * c * c;
  cost.x_star = Vector::Zero(2);
  cost.x_star(1) = torque_ref / c;
  return cost;
}

LinearConstraintSpec pmsm_constraints(const PmsmParams& p) {
  const double I = p.current_max;
  const double V = p.voltage_max;
  LinearConstraintSpec s;
  s.G_x = Matrix::Zero(8, 2);
  s.G_u = Matrix::Zero(8, 2);
  s.g0 = Vector::Zero(8);
  // i_d <= 0, -i_d <= I/2
  s.G_x(0, 0) = 1.0;
  s.G_x(1, 0) = -1.0;
  s.g0(1) = -0.5 * I;
  // |i_q| <= sqrt(3)/2 I
  s.G_x(2, 1) = 1.0;
  s.g0(2) = -kHalfSqrt3 * I;
  s.G_x(3, 1) = -1.0;
  s.g0(3) = -kHalfSqrt3 * I;
  // |v_d| <= V/2
  s.G_u(4, 0) = 1.0;
  s.g0(4) = -0.5 * V;
  s.G_u(5, 0) = -1.0;
  s.g0(5) = -0.5 * V;
  // |v_q| <= sqrt(3)/2 V
  s.G_u(6, 1) = 1.0;
  s.g0(6) = -kHalfSqrt3 * V;
  s.G_u(7, 1) = -1.0;
  s.g0(7) = -kHalfSqrt3 * V;
  return s;
}

LinearConstraintSpec controller_constraints(const LinearConstraintSpec& spec, double backoff) {
  LinearConstraintSpec out = spec;
  for (int k = 0; k < spec.rows(); ++k) {
    if (spec.G_u.row(k).squaredNorm() != 0.0) continue;
    out.g0(k) += backoff * spec.G_x.row(k).norm();
  }
  return out;
}

void add_next_sample_rows(TrajectoryPlan& plan, const TrajectoryProblem& problem, double dt) {
  const auto& sys = problem.system;
  const auto& spec = problem.constraints;
  const int n = sys.n();
  const int m = sys.m();
  const int nf = plan.cost.n_free();

  Matrix aug = Matrix::Zero(n + m + 1, n + m + 1);
  aug.topLeftCorner(n, n) = sys.A();
  aug.block(0, n, n, m) = sys.B();
  aug.block(0, n + m, n, 1) = sys.d();
  const Matrix E = (aug * dt).exp();

  // x(dt) = X * [1; alpha]
  Matrix U(m, 1 + nf);
  for (int i = 0; i < m; ++i) U.row(i) = plan.polys.inputs[i].affine_at(0.0);
  Matrix X = E.block(0, n, n, m) * U;
  X.col(0) += E.topLeftCorner(n, n) * problem.x0 + E.block(0, n + m, n, 1);

  auto& rows = plan.constraint_rows;
  for (int k = 0; k < spec.rows(); ++k) {
    if (spec.G_u.row(k).squaredNorm() != 0.0) continue;
    const Eigen::RowVectorXd g = spec.G_x.row(k) * X;
    const auto r = rows.rows();
    rows.G.conservativeResize(r + 1, nf);
    rows.h.conservativeResize(r + 1);
    rows.G.row(r) = g.tail(nf);
    rows.h(r) = -(g(0) + spec.g0(k));
    rows.tags.push_back({k, -1});
  }
}

int relax_fixed_rows(AffineConstraintSet& rows) {
  int relaxed = 0;
  for (int r = 0; r < rows.rows(); ++r) {
    if (rows.G.row(r).lpNorm<Eigen::Infinity>() != 0.0 || rows.h(r) >= 0.0) continue;
    rows.h(r) = 0.0;
    ++relaxed;
  }
  return relaxed;
}

double polytope_violation(const PmsmParams& p, double i_d, double i_q, double v_d, double v_q) {
  const auto s = pmsm_constraints(p);
  Vector x(2), u(2);
  x << i_d, i_q;
  u << v_d, v_q;
  return (s.G_x * x + s.G_u * u + s.g0).maxCoeff();
}

namespace {

struct Derivative {
  double di_d, di_q, domega;
};

Derivative dynamics(const PlantState& s, double v_d, double v_q, double load, const Scenario& sc) {
  const auto& p = sc.machine;
  const double w = p.pole_pairs * s.omega;
  const double torque = p.torque_constant() * s.i_q;
  return {
      (-p.resistance * s.i_d + w * p.inductance * s.i_q + v_d) / p.inductance,
      (-p.resistance * s.i_q - w * p.inductance * s.i_d - w * p.flux + v_q) / p.inductance,
      (torque - load - sc.friction * s.omega) / sc.inertia,
  };
}

PlantState advance(const PlantState& s, const Derivative& k, double h) {
  return {s.i_d + h * k.di_d, s.i_q + h * k.di_q, s.omega + h * k.domega};
}

}  // namespace

PlantState step_plant(const PlantState& state, double v_d, double v_q, double load, const Scenario& scenario,
                      double dt) {
  if (!(dt > 0)) throw std::invalid_argument("step_plant needs dt > 0");
  const auto k1 = dynamics(state, v_d, v_q, load, scenario);
  const auto k2 = dynamics(advance(state, k1, 0.5 * dt), v_d, v_q, load, scenario);
  const auto k3 = dynamics(advance(state, k2, 0.5 * dt), v_d, v_q, load, scenario);
  const auto k4 = dynamics(advance(state, k3, dt), v_d, v_q, load, scenario);
  PlantState next{
      state.i_d + dt / 6.0 * (k1.di_d + 2 * k2.di_d + 2 * k3.di_d + k4.di_d),
      state.i_q + dt / 6.0 * (k1.di_q + 2 * k2.di_q + 2 * k3.di_q + k4.di_q),
      state.omega + dt / 6.0 * (k1.domega + 2 * k2.domega + 2 * k3.domega + k4.domega),
  };
  if (!std::isfinite(next.i_d) || !std::isfinite(next.i_q) || !std::isfinite(next.omega)) {
    throw NonFinite("plant integration diverged");
  }
  return next;
}

double PiSpeedController::update(double reference, double measured, double dt) {
  const double e = reference - measured;
  const double candidate = integral_ + e * dt;
  const double out = kp_ * e + ki_ * candidate;
  if (out > limit_) return limit_;
  if (out < -limit_) return -limit_;
  integral_ = candidate;
  return out;
}

std::vector<TraceRow> run_closed_loop(const Scenario& scenario, SolverKind solver) {
  scenario.validate();
  const auto& p = scenario.machine;
  const auto steps = static_cast<long>(std::llround(scenario.duration / scenario.dt));
  std::vector<TraceRow> trace;
  trace.reserve(static_cast<std::size_t>(std::max(steps, 0L)));

  PlantState state;
  PiSpeedController pi(scenario.kp, scenario.ki, scenario.torque_limit);
  const auto constraints = pmsm_constraints(p);
  double v_d = 0.0;
  double v_q = 0.0;
  std::vector<int> active;

  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * scenario.dt;
    const double torque_ref = pi.update(scenario.speed_ref.at(t), state.omega, scenario.dt);

    TraceRow row;
    row.t = t;
    row.solver = solver;
    row.torque_ref = torque_ref;
    try {
      Vector x0(2);
      x0 << state.i_d, state.i_q;
      TrajectoryProblem problem{
          .system = pmsm_linearize(p, state.omega),
          .cost = pmsm_cost(p, scenario.q, state.omega, torque_ref, scenario.horizon),
          .constraints = controller_constraints(constraints, scenario.state_backoff),
          .degree = scenario.degree,
          .x0 = x0,
      };
      auto plan = condition_problem(problem);
      add_next_sample_rows(plan, problem, scenario.dt);
      if (const int n = relax_fixed_rows(plan.constraint_rows); n > 0) {
        spdlog::debug("t = {}: relaxed {} rows fixed by x0", t, n);
      }
      plan.ldp = least_distance_transform(plan.cost, plan.constraint_rows);
      QpOptions qp;
      qp.warm_start = active;
      const auto res = solve_plan(plan, solver, qp);
      row.iterations = res.iterations;
      row.status = std::string(to_string(res.status));
      if (res.optimal()) {
        const Vector u = plan.input(res.alpha, 0.0);
        v_d = u(0);
        v_q = u(1);
        row.cost = res.quadratic_cost;
        active = res.active_rows;
      } else {
        row.status = "fallback:" + row.status;
        active.clear();
      }
    } catch (const Error& e) {
      spdlog::warn("t = {}: trajectory generation failed: {}", t, e.what());
      row.status = "fallback:error";
      active.clear();
    }

    row.i_d = state.i_d;
    row.i_q = state.i_q;
    row.v_d = v_d;
    row.v_q = v_q;
    row.omega = state.omega;
    row.torque = p.torque_constant() * state.i_q;
    trace.push_back(row);

    state = step_plant(state, v_d, v_q, scenario.load_torque.at(t), scenario, scenario.dt);
  }
  return trace;
}

}  // namespace flatpoly::pmsm
