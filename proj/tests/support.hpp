#pragma once

// Independent oracles and random instance generators shared by the unit and
// acceptance tests. Nothing here calls into the library's numerical kernels
// except where a test explicitly compares against them.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "flatpoly/costcond.hpp"
#include "flatpoly/lti_flat.hpp"
#include "flatpoly/pipeline.hpp"
#include "flatpoly/polybasis.hpp"

namespace testsupport {

using flatpoly::Matrix;
using flatpoly::Vector;

inline Matrix normal_matrix(std::mt19937_64& rng, int rows, int cols, double sigma = 1.0) {
  std::normal_distribution<double> nd(0.0, sigma);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

inline Vector normal_vector(std::mt19937_64& rng, int n, double sigma = 1.0) {
  return normal_matrix(rng, n, 1, sigma).col(0);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Random SPD matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(std::mt19937_64& rng, int n, double lo = 0.5, double hi = 2.0) {
  const Eigen::HouseholderQR<Matrix> qr(normal_matrix(rng, n, n));
  const Matrix Q = qr.householderQ();
  Vector ev(n);
  for (int i = 0; i < n; ++i) ev(i) = uniform(rng, lo, hi);
  return Q * ev.asDiagonal() * Q.transpose();
}

/// Controllability by rank of [B, AB, ...] through a full-pivot LU; kept
/// separate from the library's SVD route on purpose.
inline bool controllable(const Matrix& A, const Matrix& B) {
  const int n = static_cast<int>(A.rows());
  Matrix C(n, n * B.cols());
  Matrix blk = B;
  for (int k = 0; k < n; ++k) {
    C.middleCols(k * B.cols(), B.cols()) = blk;
    blk = A * blk;
  }
  Eigen::JacobiSVD<Matrix> svd(C);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 1e-6 * s(0);
}

/// Random controllable (A, B, d); A has O(1) entries.
inline flatpoly::LtiSystem random_system(std::mt19937_64& rng, int n, int m, bool drift) {
  while (true) {
    Matrix A = normal_matrix(rng, n, n, 1.0 / std::sqrt(static_cast<double>(n)));
    Matrix B = normal_matrix(rng, n, m);
    if (!controllable(A, B)) continue;
    Vector d = drift ? normal_vector(rng, n) : Vector::Zero(n);
    return flatpoly::LtiSystem(std::move(A), std::move(B), std::move(d));
  }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Golub-Welsch.
inline std::pair<Vector, Vector> gauss_legendre(int k) {
  Matrix J = Matrix::Zero(k, k);
  for (int i = 1; i < k; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  Vector w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), w};
}

/// sum_i c_i s^i by explicit powers.
inline double naive_poly(const Vector& c, double s) {
  double v = 0.0;
  for (int i = 0; i < c.size(); ++i) v += c(i) * std::pow(s, i);
  return v;
}

/// Value of every component at normalized time s from resolved coefficients.
inline Vector naive_eval(const flatpoly::AffinePolyVector& polys, const Vector& alpha, double s) {
  Vector out(polys.size());
  for (int i = 0; i < polys.size(); ++i) {
    const Matrix& c = polys[i].coeffs();
    const Vector resolved = c.col(0) + c.rightCols(c.cols() - 1) * alpha;
    out(i) = naive_poly(resolved, s);
  }
  return out;
}

/// d/dt of every component at normalized time s, differentiating resolved
/// coefficients by hand.
inline Vector naive_eval_dt(const flatpoly::AffinePolyVector& polys, const Vector& alpha, double s) {
  Vector out(polys.size());
  for (int i = 0; i < polys.size(); ++i) {
    const Matrix& c = polys[i].coeffs();
    const Vector resolved = c.col(0) + c.rightCols(c.cols() - 1) * alpha;
    double v = 0.0;
    for (int j = 1; j < resolved.size(); ++j) v += j * resolved(j) * std::pow(s, j - 1);
    out(i) = v / polys.horizon();
  }
  return out;
}

/// The cost functional evaluated by Gauss-Legendre quadrature with enough
/// nodes to be exact for polynomial integrands of degree 2 * degree.
inline double cost_by_quadrature(const flatpoly::AffinePolyVector& states, const flatpoly::AffinePolyVector& inputs,
                                 const flatpoly::QuadraticCostSpec& cost, const Vector& alpha, int nodes) {
  const auto [x, w] = gauss_legendre(nodes);
  const double T = cost.horizon;
  const Vector& xr = cost.stage_reference();
  double J = 0.0;
  for (int q = 0; q < x.size(); ++q) {
    const double s = 0.5 * (x(q) + 1.0);
    const Vector ex = naive_eval(states, alpha, s) - xr;
    const Vector u = naive_eval(inputs, alpha, s);
    J += 0.5 * T * w(q) * (ex.dot(cost.Q * ex) + u.dot(cost.R * u) + cost.stage_offset);
  }
  const Vector eT = naive_eval(states, alpha, 1.0) - cost.x_star;
  return J + eT.dot(cost.P * eT);
}

/// min ||f||^2 s.t. G f <= h through the dual: max_{lambda >= 0}
/// -||G^T lambda||^2 / 4 - h^T lambda, solved by accelerated projected
/// gradient. Returns f = -G^T lambda / 2.
inline Vector dual_projected_gradient(const Matrix& G, const Vector& h, int iterations = 200000) {
  const int M = static_cast<int>(G.rows());
  if (M == 0) return Vector::Zero(G.cols());
  const Matrix GG = G * G.transpose();
  const double L = 0.5 * Eigen::SelfAdjointEigenSolver<Matrix>(GG).eigenvalues().maxCoeff();
  Vector lam = Vector::Zero(M), y = lam, prev = lam;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const Vector grad = -0.5 * GG * y - h;  // ascent direction of the dual
    prev = lam;
    lam = (y + grad / L).cwiseMax(0.0);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = lam + ((t - 1.0) / tn) * (lam - prev);
    t = tn;
    if (it % 1000 == 999 && (lam - prev).norm() < 1e-15 * (1.0 + lam.norm())) break;
  }
  return -0.5 * G.transpose() * lam;
}

/// Random points of {f : G f <= h} by hit-and-run from a strictly feasible
/// start.
inline std::vector<Vector> hit_and_run(std::mt19937_64& rng, const Matrix& G, const Vector& h, Vector start,
                                       int count, double box) {
  std::vector<Vector> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const int n = static_cast<int>(G.cols());
  Vector f = std::move(start);
  while (static_cast<int>(pts.size()) < count) {
    Vector d = normal_vector(rng, n);
    d.normalize();
    double lo = -box, hi = box;
    const Vector gd = G * d;
    const Vector slack = h - G * f;
    for (int i = 0; i < G.rows(); ++i) {
      if (gd(i) > 1e-14) hi = std::min(hi, slack(i) / gd(i));
      if (gd(i) < -1e-14) lo = std::max(lo, slack(i) / gd(i));
    }
    if (hi <= lo) continue;
    f += uniform(rng, lo, hi) * d;
    pts.push_back(f);
  }
  return pts;
}

/// Random trajectory problem on a random controllable system with
/// box-like state/input rows that contain x0.
inline flatpoly::TrajectoryProblem random_problem(std::mt19937_64& rng, int n, int m, int degree, bool drift) {
  auto sys = random_system(rng, n, m, drift);
  flatpoly::QuadraticCostSpec cost;
  cost.Q = random_spd(rng, n);
  cost.R = random_spd(rng, m);
  cost.P = random_spd(rng, n);
  cost.x_star = normal_vector(rng, n);
  cost.horizon = uniform(rng, 0.5, 2.0);
  Vector x0 = normal_vector(rng, n, 0.5);

  const int rows = uniform_int(rng, 1, 2 * (n + m));
  flatpoly::LinearConstraintSpec cons;
  cons.G_x = Matrix::Zero(rows, n);
  cons.G_u = Matrix::Zero(rows, m);
  cons.g0 = Vector::Zero(rows);
  for (int k = 0; k < rows; ++k) {
    if (k % 2 == 0) {
      cons.G_x.row(k) = normal_vector(rng, n).transpose();
    } else {
      cons.G_u.row(k) = normal_vector(rng, m).transpose();
    }
    const double at_x0 = cons.G_x.row(k).dot(x0);
    cons.g0(k) = -at_x0 - uniform(rng, 0.2, 2.0);  // x0 strictly inside
  }
  return flatpoly::TrajectoryProblem{
      .system = std::move(sys),
      .cost = std::move(cost),
      .constraints = std::move(cons),
      .degree = degree,
      .x0 = std::move(x0),
  };
}

}  // namespace testsupport
