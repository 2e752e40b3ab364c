#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <unsupported/Eigen/MatrixFunctions>

#include "flatpoly/errors.hpp"
#include "flatpoly/pmsm.hpp"

using namespace flatpoly;
using namespace flatpoly::pmsm;

namespace {

const std::vector<TraceRow>& default_trace(SolverKind kind) {
  static const auto qp = run_closed_loop(Scenario{}, SolverKind::QP);
  static const auto lp = run_closed_loop(Scenario{}, SolverKind::LP);
  return kind == SolverKind::QP ? qp : lp;
}

}  // namespace

TEST(Linearize, Examples) {
  const PmsmParams p;
  const auto s0 = pmsm_linearize(p, 0.0);
  EXPECT_NEAR(s0.A()(0, 0), -143.333333, 1e-5);
  EXPECT_NEAR(s0.A()(1, 1), -143.333333, 1e-5);
  EXPECT_EQ(s0.A()(0, 1), 0.0);
  EXPECT_TRUE(s0.B().isApprox(Matrix::Identity(2, 2) / 6e-3));
  EXPECT_NEAR(s0.B()(0, 0), 166.666667, 1e-6);
  EXPECT_TRUE(s0.d().isZero());

  const auto s1 = pmsm_linearize(p, 100.0);
  EXPECT_NEAR(s1.A()(0, 1), 300.0, 1e-12);
  EXPECT_NEAR(s1.A()(1, 0), -300.0, 1e-12);
  EXPECT_NEAR(s1.d()(1), -11800.0, 1e-9);
  EXPECT_THROW(pmsm_linearize(p, 2.0 * p.rated_speed + 1.0), std::invalid_argument);
  EXPECT_NO_THROW(pmsm_linearize(p, -2.0 * p.rated_speed));
}

TEST(Cost, TorqueConstantAndCompletedSquare) {
  const PmsmParams p;
  EXPECT_NEAR(p.torque_constant(), 1.062, 1e-12);
  const double q = 20, omega = 250, tref = 4.0;
  const auto c = pmsm_cost(p, q, omega, tref, 2e-3);
  // Completed square must reproduce the expanded stage cost at any point.
  for (double id : {-3.0, 0.0, 1.5}) {
    for (double iq : {-2.0, 0.5, 7.0}) {
      Vector x(2);
      x << id, iq;
      const Vector e = x - *c.x_ref;
      const double stage = e.dot(c.Q * e) + c.stage_offset;
      const double tau = p.torque_constant() * iq;
      const double w = omega / p.iron_resistance;
      const double direct = q * (tau - tref) * (tau - tref) + p.resistance * (id * id + iq * iq) +
                            w * (std::pow(p.inductance * id + p.flux, 2) + iq * iq);
      EXPECT_NEAR(stage, direct, 1e-9 * (1 + direct));
      const Vector eT = x - c.x_star;
      EXPECT_NEAR(eT.dot(c.P * eT), q * 2e-3 * (tau - tref) * (tau - tref), 1e-12);
    }
  }
}

TEST(Constraints, Polytope) {
  const PmsmParams p;
  const auto s = pmsm_constraints(p);
  EXPECT_EQ(s.rows(), 8);
  EXPECT_LE(polytope_violation(p, 0, 0, 0, 0), 0.0);
  const double iq = std::sqrt(3.0) / 2 * p.current_max;
  EXPECT_NEAR(25.0 + iq * iq, 100.0, 1e-12);
  EXPECT_NEAR(polytope_violation(p, -5.0, iq, 0, 0), 0.0, 1e-12);
  const double vq = std::sqrt(3.0) / 2 * p.voltage_max;
  EXPECT_NEAR(polytope_violation(p, 0, 0, -p.voltage_max / 2, vq), 0.0, 1e-12);
  EXPECT_NEAR(std::hypot(p.voltage_max / 2, vq), p.voltage_max, 1e-9);
  EXPECT_GT(polytope_violation(p, 0.1, 0, 0, 0), 0.0);
}

TEST(Constraints, ControllerBackoffTouchesStateRowsOnly) {
  const PmsmParams p;
  const auto s = pmsm_constraints(p);
  const auto t = controller_constraints(s, 0.05);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(t.g0(k), s.g0(k) + 0.05, 1e-15);
  for (int k = 4; k < 8; ++k) EXPECT_EQ(t.g0(k), s.g0(k));
}

TEST(Constraints, RelaxFixedRows) {
  AffineConstraintSet rows;
  rows.G = Matrix::Zero(3, 2);
  rows.G(2, 0) = 1.0;
  rows.h = Vector(3);
  rows.h << -0.5, 0.5, -1.0;
  rows.tags.resize(3);
  EXPECT_EQ(relax_fixed_rows(rows), 1);
  EXPECT_EQ(rows.h(0), 0.0);
  EXPECT_EQ(rows.h(1), 0.5);
  EXPECT_EQ(rows.h(2), -1.0);
}

// The next-sample rows must agree with integrating the frozen-speed model
// under the held input u(0).
TEST(Constraints, NextSampleRowsMatchDiscretization) {
  const PmsmParams p;
  const double omega = 200.0, dt = 1e-4;
  Vector x0(2);
  x0 << -1.0, 3.0;
  TrajectoryProblem prob{
      .system = pmsm_linearize(p, omega),
      .cost = pmsm_cost(p, 20.0, omega, 5.0, 2e-3),
      .constraints = pmsm_constraints(p),
      .degree = 5,
      .x0 = x0,
  };
  auto plan = condition_problem(prob);
  const int before = plan.constraint_rows.rows();
  add_next_sample_rows(plan, prob, dt);
  ASSERT_EQ(plan.constraint_rows.rows(), before + 4);

  const Vector alpha = Vector::LinSpaced(plan.cost.n_free(), -1.0, 2.0);
  const Vector u0 = plan.input(alpha, 0.0);
  // Fine RK4 on the frozen LTI model.
  Vector x = x0;
  const auto& s = prob.system;
  const int steps = 1000;
  const double h = dt / steps;
  auto f = [&](const Vector& z) -> Vector { return s.A() * z + s.B() * u0 + s.d(); };
  for (int i = 0; i < steps; ++i) {
    const Vector k1 = f(x), k2 = f(x + 0.5 * h * k1), k3 = f(x + 0.5 * h * k2), k4 = f(x + h * k3);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  for (int r = before; r < before + 4; ++r) {
    const auto tag = plan.constraint_rows.tags[r];
    EXPECT_EQ(tag.sample, -1);
    const double lhs = plan.constraint_rows.G.row(r).dot(alpha) - plan.constraint_rows.h(r);
    const double expect = prob.constraints.G_x.row(tag.constraint).dot(x) + prob.constraints.g0(tag.constraint);
    EXPECT_NEAR(lhs, expect, 1e-8);
  }
}

TEST(Plant, ZeroStaysZero) {
  const Scenario sc;
  const auto s = step_plant({}, 0, 0, 0, sc, 1e-4);
  EXPECT_EQ(s.i_d, 0.0);
  EXPECT_EQ(s.i_q, 0.0);
  EXPECT_EQ(s.omega, 0.0);
  EXPECT_THROW(step_plant({}, 0, 0, 0, sc, 0.0), std::invalid_argument);
}

TEST(Plant, FirstOrderStepResponse) {
  Scenario sc;
  sc.inertia = 1e9;  // keeps omega frozen at zero
  const auto& p = sc.machine;
  const double tau = p.inductance / p.resistance;
  EXPECT_NEAR(tau, 7e-3, 0.1e-3);
  PlantState s;
  const double v = 5.0, dt = 1e-5;
  for (int k = 1; k <= 2000; ++k) {
    s = step_plant(s, 0.0, v, 0.0, sc, dt);
    if (k % 250 == 0) {
      const double expect = v / p.resistance * (1.0 - std::exp(-k * dt / tau));
      EXPECT_NEAR(s.i_q, expect, 1e-3 * std::abs(v / p.resistance));
    }
  }
  EXPECT_NEAR(s.i_d, 0.0, 1e-9);
}

TEST(Plant, ElectricalEnergyNonincreasingWithZeroInputs) {
  Scenario sc;
  sc.inertia = 1e9;
  const auto& p = sc.machine;
  PlantState s{3.0, -4.0, 0.0};
  double prev = 0.5 * p.inductance * (s.i_d * s.i_d + s.i_q * s.i_q);
  for (int k = 0; k < 500; ++k) {
    s = step_plant(s, 0, 0, 0, sc, 1e-4);
    const double e = 0.5 * p.inductance * (s.i_d * s.i_d + s.i_q * s.i_q);
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(Plant, TotalEnergyNonincreasingWhileSpinning) {
  const Scenario sc;
  const auto& p = sc.machine;
  PlantState s{-2.0, 5.0, 300.0};
  auto energy = [&](const PlantState& z) {
    return 0.75 * p.inductance * (z.i_d * z.i_d + z.i_q * z.i_q) + 0.5 * sc.inertia * z.omega * z.omega;
  };
  double prev = energy(s);
  for (int k = 0; k < 500; ++k) {
    s = step_plant(s, 0, 0, 0, sc, 1e-5);
    const double e = energy(s);
    EXPECT_LE(e, prev + 1e-12 * prev);
    prev = e;
  }
}

// One horizon at rated torque: the frozen-speed LTI prediction against the
// nonlinear plant that accelerates meanwhile.
TEST(Plant, FrozenSpeedModelErrorAtRatedAcceleration) {
  const Scenario sc;
  const auto& p = sc.machine;
  const double omega0 = 200.0;
  const double iq0 = p.rated_torque / p.torque_constant();
  PlantState s{0.0, iq0, omega0};
  // Voltages that hold the currents at the start speed.
  const double w = p.pole_pairs * omega0;
  const double vd = -w * p.inductance * iq0;
  const double vq = p.resistance * iq0 + w * p.flux;

  const auto sys = pmsm_linearize(p, omega0);
  Matrix aug = Matrix::Zero(5, 5);
  aug.topLeftCorner(2, 2) = sys.A();
  aug.block(0, 2, 2, 2) = sys.B();
  aug.block(0, 4, 2, 1) = sys.d();
  const Matrix E = (aug * sc.horizon).exp();
  Vector z(5);
  z << 0.0, iq0, vd, vq, 1.0;
  const Vector predicted = (E * z).head(2);

  const int steps = 200;
  for (int k = 0; k < steps; ++k) s = step_plant(s, vd, vq, 0.0, sc, sc.horizon / steps);
  const double err = std::hypot(s.i_d - predicted(0), s.i_q - predicted(1));
  RecordProperty("frozen_speed_error_A", std::to_string(err));
  EXPECT_LT(err, 0.05 * p.current_max) << "omega gained " << s.omega - omega0 << " rad/s over the horizon";
}

TEST(SpeedController, Examples) {
  PiSpeedController pi(0.5, 20.0, 10.0);
  EXPECT_EQ(pi.update(0.0, 0.0, 1e-4), 0.0);
  EXPECT_EQ(pi.integral(), 0.0);
  // Clamped: pinned at the limit, integrator held.
  for (int k = 0; k < 10; ++k) EXPECT_EQ(pi.update(420.0, 0.0, 1e-4), 10.0);
  EXPECT_EQ(pi.integral(), 0.0);
  EXPECT_EQ(pi.update(-420.0, 0.0, 1e-4), -10.0);
  // Unclamped ramp: kp e + ki e t.
  pi.reset();
  const double e = 2.0, dt = 1e-3;
  double out = 0;
  for (int k = 1; k <= 50; ++k) {
    out = pi.update(e, 0.0, dt);
    EXPECT_NEAR(out, 0.5 * e + 20.0 * e * k * dt, 1e-12);
  }
}

TEST(Scenario, Validation) {
  Scenario s;
  EXPECT_NO_THROW(s.validate());
  s.dt = 3e-3;
  EXPECT_THROW(s.validate(), ConfigError);
  s = Scenario{};
  s.machine.inductance = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = Scenario{};
  s.degree = 16;
  EXPECT_THROW(s.validate(), ConfigError);
  s = Scenario{};
  s.state_backoff = -1;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_NEAR(Schedule({1.0, {{0.5, 2.0}, {1.0, 3.0}}}).at(0.75), 2.0, 0);
  EXPECT_NEAR(Schedule({1.0, {{0.5, 2.0}}}).at(0.25), 1.0, 0);
}

// "At rest" is up to the controller-side back-off: the tightened row
// i_d <= -backoff holds the d current just below zero.
TEST(ClosedLoop, ZeroScenarioStaysAtRest) {
  Scenario s;
  s.speed_ref = {0.0, {}};
  s.load_torque = {0.0, {}};
  s.duration = 0.01;
  for (auto kind : {SolverKind::QP, SolverKind::LP}) {
    const auto trace = run_closed_loop(s, kind);
    ASSERT_EQ(trace.size(), 100u);
    for (const auto& r : trace) {
      EXPECT_NEAR(r.i_d, 0.0, s.state_backoff + 1e-6);
      EXPECT_NEAR(r.i_q, 0.0, 1e-6);
      EXPECT_NEAR(r.v_d, 0.0, 0.01 * s.machine.voltage_max);
      EXPECT_NEAR(r.v_q, 0.0, 1e-4);
      EXPECT_NEAR(r.omega, 0.0, 1e-6);
    }
  }
}

TEST(ClosedLoop, Deterministic) {
  Scenario s;
  s.duration = 0.02;
  const auto a = run_closed_loop(s, SolverKind::QP);
  const auto b = run_closed_loop(s, SolverKind::QP);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::memcmp(&a[i].i_d, &b[i].i_d, sizeof(double)), 0);
    EXPECT_EQ(a[i].i_q, b[i].i_q);
    EXPECT_EQ(a[i].v_d, b[i].v_d);
    EXPECT_EQ(a[i].v_q, b[i].v_q);
    EXPECT_EQ(a[i].omega, b[i].omega);
    EXPECT_EQ(a[i].iterations, b[i].iterations);
    EXPECT_EQ(a[i].status, b[i].status);
  }
}

TEST(ClosedLoop, DefaultScenarioStaysInsidePolytope) {
  const PmsmParams p;
  for (auto kind : {SolverKind::QP, SolverKind::LP}) {
    for (const auto& r : default_trace(kind)) {
      EXPECT_LE(polytope_violation(p, r.i_d, r.i_q, r.v_d, r.v_q), 1e-6) << to_string(kind) << " t=" << r.t;
      EXPECT_EQ(r.status.rfind("fallback", 0), std::string::npos) << r.t;
    }
  }
}

TEST(ClosedLoop, SteadyStateAgreement) {
  const PmsmParams p;
  const auto& qp = default_trace(SolverKind::QP);
  const auto& lp = default_trace(SolverKind::LP);
  ASSERT_EQ(qp.size(), lp.size());
  for (std::size_t i = qp.size() - 100; i < qp.size(); ++i) {
    EXPECT_LT(std::abs(qp[i].i_d - lp[i].i_d), 0.02 * p.current_max);
    EXPECT_LT(std::abs(qp[i].i_q - lp[i].i_q), 0.02 * p.current_max);
    EXPECT_LT(std::abs(qp[i].omega - lp[i].omega), 0.02 * p.rated_speed);
    EXPECT_LT(std::abs(qp[i].torque - lp[i].torque), 0.02 * p.rated_torque);
  }
}
