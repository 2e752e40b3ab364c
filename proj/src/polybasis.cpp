#include "flatpoly/polybasis.hpp"

#include <spdlog/spdlog.h>

#include <string>

#include "flatpoly/errors.hpp"

namespace flatpoly {

AffinePoly::AffinePoly(int degree, int n_free, double horizon)
    : coeffs_(Matrix::Zero(degree + 1, n_free + 1)), horizon_(horizon) {
  if (degree < 0 || n_free < 0) throw DimensionMismatch("negative polynomial dimensions");
  if (!(horizon > 0.0)) throw DimensionMismatch("horizon must be positive");
}

AffinePoly::AffinePoly(Matrix coeffs, double horizon) : coeffs_(std::move(coeffs)), horizon_(horizon) {
  if (coeffs_.rows() < 1 || coeffs_.cols() < 1) throw DimensionMismatch("empty coefficient matrix");
  if (!(horizon > 0.0)) throw DimensionMismatch("horizon must be positive");
}

Vector AffinePoly::resolve(const Vector& alpha) const {
  if (alpha.size() != n_free()) {
    throw DimensionMismatch("alpha has " + std::to_string(alpha.size()) + " entries, expected " +
                            std::to_string(n_free()));
  }
  return coeffs_.col(0) + coeffs_.rightCols(n_free()) * alpha;
}

Eigen::RowVectorXd AffinePoly::affine_at(double s) const {
  Eigen::RowVectorXd acc = coeffs_.row(degree());
  for (int i = degree() - 1; i >= 0; --i) acc = acc * s + coeffs_.row(i);
  return acc;
}

AffinePoly AffinePoly::derivative() const {
  AffinePoly out(Matrix::Zero(coeffs_.rows(), coeffs_.cols()), horizon_);
  for (int i = 0; i < degree(); ++i) {
    out.coeffs_.row(i) = static_cast<double>(i + 1) / horizon_ * coeffs_.row(i + 1);
  }
  return out;
}

AffinePoly AffinePoly::integral() const {
  const bool grow = !coeffs_.row(degree()).isZero(0.0);
  AffinePoly out(Matrix::Zero(coeffs_.rows() + (grow ? 1 : 0), coeffs_.cols()), horizon_);
  const int top = grow ? degree() : degree() - 1;
  for (int i = 0; i <= top; ++i) {
    out.coeffs_.row(i + 1) = horizon_ / static_cast<double>(i + 1) * coeffs_.row(i);
  }
  return out;
}

AffinePoly& AffinePoly::operator+=(const AffinePoly& other) {
  if (other.coeffs_.cols() != coeffs_.cols() || other.horizon_ != horizon_) {
    throw DimensionMismatch("adding affine polynomials with different parameter space or horizon");
  }
  if (other.coeffs_.rows() > coeffs_.rows()) {
    Matrix grown = Matrix::Zero(other.coeffs_.rows(), coeffs_.cols());
    grown.topRows(coeffs_.rows()) = coeffs_;
    coeffs_ = std::move(grown);
  }
  coeffs_.topRows(other.coeffs_.rows()) += other.coeffs_;
  return *this;
}

AffinePoly& AffinePoly::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

AffinePoly operator+(AffinePoly a, const AffinePoly& b) { return a += b; }
AffinePoly operator*(double s, AffinePoly a) { return a *= s; }

int BasisSpec::free_index(int output, int power) const {
  int idx = 0;
  for (int i = 0; i < output; ++i) idx += degree + 1 - r[static_cast<std::size_t>(i)];
  return idx + power - r[static_cast<std::size_t>(output)];
}

BasisSpec apply_initial_conditions(const FlatMap& flat, const Vector& x0, int degree, double horizon) {
  if (x0.size() != flat.n()) throw DimensionMismatch("initial state has wrong dimension");
  if (!(horizon > 0.0)) throw DimensionMismatch("horizon must be positive");
  const int rmax = flat.max_relative_degree();
  if (degree < rmax) {
    throw DegreeTooLow("polynomial degree " + std::to_string(degree) + " < max relative degree " +
                       std::to_string(rmax));
  }
  if (degree > kMaxDegree) {
    throw DegreeOutOfRange("polynomial degree " + std::to_string(degree) + " exceeds " +
                           std::to_string(kMaxDegree));
  }

  BasisSpec b;
  b.degree = degree;
  b.horizon = horizon;
  b.r = flat.r;
  b.n_free = flat.m() * (degree + 1) - flat.n();

  // y^{(k)}(0) = alpha_k k! / T^k under the (t/T)^j basis.
  const Vector z0 = flat.chain_from_state(x0);
  for (int i = 0; i < flat.m(); ++i) {
    const int ri = flat.r[static_cast<std::size_t>(i)];
    Vector fixed(ri);
    double scale = 1.0;  // T^k / k!
    for (int k = 0; k < ri; ++k) {
      if (k > 0) scale *= horizon / static_cast<double>(k);
      fixed(k) = z0(flat.chain_index(i, k)) * scale;
    }
    b.fixed.push_back(std::move(fixed));
  }
  return b;
}

std::vector<AffinePolyVector> parameterize_outputs(const BasisSpec& basis) {
  const int m = basis.m();
  int rmax = 0;
  for (int ri : basis.r) rmax = std::max(rmax, ri);

  AffinePolyVector y;
  y.role = PolyRole::Output;
  for (int i = 0; i < m; ++i) {
    AffinePoly p(basis.degree, basis.n_free, basis.horizon);
    const int ri = basis.r[static_cast<std::size_t>(i)];
    for (int j = 0; j < ri; ++j) p.coeffs()(j, 0) = basis.fixed[static_cast<std::size_t>(i)](j);
    for (int j = ri; j <= basis.degree; ++j) p.coeffs()(j, 1 + basis.free_index(i, j)) = 1.0;
    y.components.push_back(std::move(p));
  }

  std::vector<AffinePolyVector> derivs;
  derivs.push_back(std::move(y));
  for (int k = 1; k <= rmax; ++k) {
    AffinePolyVector next;
    next.role = PolyRole::Output;
    for (const auto& p : derivs.back().components) next.components.push_back(p.derivative());
    derivs.push_back(std::move(next));
  }
  return derivs;
}

StateInputPolys parameterize_states_inputs(const FlatMap& flat, const BasisSpec& basis) {
  if (basis.m() != flat.m()) throw DimensionMismatch("basis and flat map disagree on m");
  const auto derivs = parameterize_outputs(basis);
  const int n = flat.n();
  const int m = flat.m();

  StateInputPolys out;
  out.states.role = PolyRole::State;
  out.inputs.role = PolyRole::Input;
  for (int c = 0; c < n; ++c) {
    AffinePoly x(basis.degree, basis.n_free, basis.horizon);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < flat.r[static_cast<std::size_t>(i)]; ++k) {
        x += flat.Xi_x(c, flat.chain_index(i, k)) * derivs[static_cast<std::size_t>(k)][i];
      }
    }
    x.add_constant(flat.x_off(c));
    out.states.components.push_back(std::move(x));
  }
  for (int c = 0; c < m; ++c) {
    AffinePoly u(basis.degree, basis.n_free, basis.horizon);
    for (int i = 0; i < m; ++i) {
      const int ri = flat.r[static_cast<std::size_t>(i)];
      for (int k = 0; k < ri; ++k) {
        u += flat.Xi_u_z(c, flat.chain_index(i, k)) * derivs[static_cast<std::size_t>(k)][i];
      }
      u += flat.Xi_u_top(c, i) * derivs[static_cast<std::size_t>(ri)][i];
    }
    u.add_constant(flat.u_off(c));
    out.inputs.components.push_back(std::move(u));
  }
  return out;
}

double evaluate(const AffinePoly& poly, const Vector& alpha, double t) {
  if (poly.outside_horizon(t)) {
    spdlog::debug("evaluating polynomial at t = {} outside [0, {}]", t, poly.horizon());
  }
  const Vector c = poly.resolve(alpha);
  const double s = t / poly.horizon();
  double v = c(c.size() - 1);
  for (Eigen::Index i = c.size() - 1; i-- > 0;) v = v * s + c(i);
  return v;
}

Vector evaluate(const AffinePolyVector& polys, const Vector& alpha, double t) {
  Vector out(polys.size());
  for (int i = 0; i < polys.size(); ++i) out(i) = evaluate(polys[i], alpha, t);
  return out;
}

}  // namespace flatpoly
