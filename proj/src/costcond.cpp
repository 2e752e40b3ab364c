#include "flatpoly/costcond.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "flatpoly/errors.hpp"
#include "flatpoly/kernels.hpp"

namespace flatpoly {

double ParameterizedCost::value(const Vector& alpha) const {
  if (alpha.size() != k.size()) throw DimensionMismatch("alpha has wrong dimension for cost");
  return alpha.dot(K * alpha) + k.dot(alpha) + k0;
}

Matrix gram_weights(int degree, double horizon) {
  if (degree < 0) throw DimensionMismatch("gram weights need N >= 0");
  Matrix w(degree + 1, degree + 1);
  for (int i = 0; i <= degree; ++i) {
    for (int j = 0; j <= degree; ++j) {
      const int e = i + j + 1;
      w(i, j) = std::pow(horizon, e) / e;
    }
  }
  return w;
}

namespace {

// int_0^1 s^i s^j ds, cached per degree; the horizon enters as a scale.
const Matrix& unit_gram(int degree) {
  static const std::array<Matrix, 2 * kMaxDegree + 2> table = [] {
    std::array<Matrix, 2 * kMaxDegree + 2> t;
    for (int n = 0; n < static_cast<int>(t.size()); ++n) t[static_cast<std::size_t>(n)] = gram_weights(n, 1.0);
    return t;
  }();
  if (degree < 0 || degree >= static_cast<int>(table.size())) {
    throw DegreeOutOfRange("polynomial degree out of range for cost conditioning");
  }
  return table[static_cast<std::size_t>(degree)];
}

// Stack [E_0; E_1; ...; E_N] where row c of E_p is component c's power-p row.
Matrix stack_powers(const AffinePolyVector& v, int degree, int cols) {
  const int dim = v.size();
  Matrix s = Matrix::Zero((degree + 1) * dim, cols);
  for (int c = 0; c < dim; ++c) {
    const Matrix& co = v[c].coeffs();
    for (int p = 0; p < co.rows(); ++p) s.row(p * dim + c) = co.row(p);
  }
  return s;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void check_square(const Matrix& m, int n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionMismatch(std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  }
}

}  // namespace

ParameterizedCost condition_cost(const AffinePolyVector& states, const AffinePolyVector& inputs,
                                 const QuadraticCostSpec& cost) {
  const int n = states.size();
  const int m = inputs.size();
  check_square(cost.Q, n, "Q");
  check_square(cost.R, m, "R");
  check_square(cost.P, n, "P");
  if (cost.x_star.size() != n) throw DimensionMismatch("x_star must have n entries");
  if (cost.x_ref && cost.x_ref->size() != n) throw DimensionMismatch("x_ref must have n entries");
  if (n > 0 && std::abs(states.horizon() - cost.horizon) > 1e-12 * cost.horizon) {
    throw DimensionMismatch("cost horizon differs from the parameterization horizon");
  }
  if (m > 0 && inputs.n_free() != states.n_free()) throw DimensionMismatch("state/input parameter mismatch");

  const int cols = states.n_free() + 1;
  const double T = cost.horizon;

  // Augmented quadratic form in [1; alpha].
  Matrix H = Matrix::Zero(cols, cols);

  {
    AffinePolyVector err = states;
    const Vector& xr = cost.stage_reference();
    for (int c = 0; c < n; ++c) err[c].add_constant(-xr(c));
    const int deg = err.degree();
    const Matrix s = stack_powers(err, deg, cols);
    H += T * s.transpose() * kron(unit_gram(deg), cost.Q) * s;
  }
  if (m > 0) {
    const int deg = inputs.degree();
    const Matrix s = stack_powers(inputs, deg, cols);
    H += T * s.transpose() * kron(unit_gram(deg), cost.R) * s;
  }
  {
    // x(T) - x_star: sum of all power rows at s = 1.
    Matrix e(n, cols);
    for (int c = 0; c < n; ++c) e.row(c) = states[c].coeffs().colwise().sum();
    e.col(0) -= cost.x_star;
    H += e.transpose() * cost.P * e;
  }

  ParameterizedCost pc;
  const int nf = cols - 1;
  pc.K = H.bottomRightCorner(nf, nf);
  pc.K = 0.5 * (pc.K + pc.K.transpose()).eval();
  pc.k = H.col(0).tail(nf) + H.row(0).tail(nf).transpose();
  pc.k0 = H(0, 0) + T * cost.stage_offset;
  return pc;
}

Matrix assert_convexity(const ParameterizedCost& pc) {
  const Eigen::Index n = pc.K.rows();
  if (pc.K.cols() != n) throw DimensionMismatch("K must be square");
  // Column-major storage keeps each column prefix contiguous for the dot kernel.
  Matrix F = Matrix::Zero(n, n);
  const double rel = 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::span<const double> cj(F.col(j).data(), static_cast<std::size_t>(j));
    const double d = pc.K(j, j) - kernels::dot(cj, cj);
    if (!(d > rel * std::abs(pc.K(j, j))) || !(d > 0.0)) {
      throw NotPositiveDefinite(static_cast<int>(j), d);
    }
    const double fjj = std::sqrt(d);
    F(j, j) = fjj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const std::span<const double> ci(F.col(i).data(), static_cast<std::size_t>(j));
      F(j, i) = (pc.K(j, i) - kernels::dot(cj, ci)) / fjj;
    }
  }
  return F;
}

Vector unconstrained_optimum(const ParameterizedCost& pc) {
  const Matrix F = assert_convexity(pc);
  const auto U = F.triangularView<Eigen::Upper>();
  const Vector w = U.transpose().solve(Vector(-0.5 * pc.k));
  return U.solve(w);
}

Vector LeastDistanceProblem::to_alpha(const Vector& f) const {
  return alpha0 + F.triangularView<Eigen::Upper>().solve(f);
}

Vector LeastDistanceProblem::to_f(const Vector& alpha) const { return F * (alpha - alpha0); }

LeastDistanceProblem least_distance_transform(const ParameterizedCost& pc, const AffineConstraintSet& constraints) {
  if (constraints.rows() > 0 && constraints.G.cols() != pc.n_free()) {
    throw DimensionMismatch("constraint set and cost disagree on the parameter dimension");
  }
  LeastDistanceProblem ldp;
  ldp.F = assert_convexity(pc);
  if ((ldp.F.diagonal().array() == 0.0).any() || !ldp.F.allFinite()) throw SingularF("F is singular");
  const Matrix& Fc = ldp.F;
  const auto U = Fc.triangularView<Eigen::Upper>();
  ldp.alpha0 = U.solve(Vector(U.transpose().solve(Vector(-0.5 * pc.k))));
  ldp.offset = pc.value(ldp.alpha0);
  if (constraints.rows() > 0) {
    // G F^{-1} = (F^{-T} G^T)^T
    ldp.G = U.transpose().solve(constraints.G.transpose()).transpose();
    ldp.h = constraints.h - constraints.G * ldp.alpha0;
  } else {
    ldp.G.resize(0, pc.n_free());
    ldp.h.resize(0);
  }
  ldp.tags = constraints.tags;
  return ldp;
}

}  // namespace flatpoly
