#include "flatpoly/lti_flat.hpp"

#include <algorithm>
#include <numeric>

#include "flatpoly/errors.hpp"

namespace flatpoly {

LtiSystem::LtiSystem(Matrix a, Matrix b, Vector drift) : a_(std::move(a)), b_(std::move(b)) {
  const auto n = a_.rows();
  if (n < 1 || a_.cols() != n) throw DimensionMismatch("A must be square with n >= 1");
  if (b_.rows() != n) throw DimensionMismatch("B must have n rows");
  if (b_.cols() < 1 || b_.cols() > n) throw DimensionMismatch("B must have 1 <= m <= n columns");
  if (drift.size() == 0) {
    d_ = Vector::Zero(n);
  } else if (drift.size() != n) {
    throw DimensionMismatch("drift d must have n entries");
  } else {
    d_ = std::move(drift);
  }
  if (!a_.allFinite() || !b_.allFinite() || !d_.allFinite()) {
    throw DimensionMismatch("system matrices must be finite");
  }
  if (numerical_rank(b_) < b_.cols()) throw DimensionMismatch("B must have full column rank");
}

int numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double thresh = kRankTolerance * sv(0);
  return static_cast<int>((sv.array() > thresh).count());
}

ControllabilityResult controllability_matrix(const LtiSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  ControllabilityResult out;
  out.matrix.resize(n, n * m);
  Matrix block = sys.B();
  for (int k = 0; k < n; ++k) {
    out.matrix.middleCols(k * m, m) = block;
    block = sys.A() * block;
  }
  out.rank = numerical_rank(out.matrix);
  return out;
}

namespace {

// Greedy selection; returns the indices and the selected columns in
// per-input chain order (b_1, A b_1, ..., b_2, A b_2, ...).
std::vector<int> select_chains(const LtiSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  std::vector<int> r(m, 0);
  std::vector<bool> open(m, true);
  Matrix selected(n, 0);
  Matrix power = sys.B();  // A^k B
  for (int k = 0; k < n && static_cast<int>(selected.cols()) < n; ++k) {
    for (int i = 0; i < m; ++i) {
      if (!open[i]) continue;
      Vector cand = power.col(i);
      const double nrm = cand.norm();
      if (nrm > 0.0) cand /= nrm;
      Matrix trial(n, selected.cols() + 1);
      trial << selected, cand;
      if (nrm > 0.0 && numerical_rank(trial) == trial.cols()) {
        selected = std::move(trial);
        ++r[i];
      } else {
        // once A^k b_i depends on earlier columns, so do all higher powers
        open[i] = false;
      }
    }
    power = sys.A() * power;
  }
  return r;
}

}  // namespace

std::vector<int> brunovsky_indices(const LtiSystem& sys) {
  const auto ctrb = controllability_matrix(sys);
  if (ctrb.rank < sys.n()) throw UncontrollableSystem(ctrb.rank, sys.n());
  auto r = select_chains(sys);
  const int total = std::accumulate(r.begin(), r.end(), 0);
  if (total != sys.n() || std::any_of(r.begin(), r.end(), [](int v) { return v < 1; })) {
    throw UncontrollableSystem(total, sys.n());
  }
  return r;
}

int FlatMap::max_relative_degree() const { return r.empty() ? 0 : *std::max_element(r.begin(), r.end()); }

int FlatMap::chain_index(int output, int order) const {
  int idx = 0;
  for (int i = 0; i < output; ++i) idx += r[i];
  return idx + order;
}

Vector FlatMap::chain_from_state(const Vector& x) const { return T_z * (x - x_off); }

Vector FlatMap::state_from_chain(const Vector& z) const { return Xi_x * z + x_off; }

Vector FlatMap::input_from_chain(const Vector& z, const Vector& top) const {
  return Xi_u_z * z + Xi_u_top * top + u_off;
}

FlatMap flat_transform(const LtiSystem& sys) {
  const int n = sys.n();
  const int m = sys.m();
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();

  FlatMap fm;
  fm.r = brunovsky_indices(sys);

  // M = [b_1, A b_1, ..., A^{r_1-1} b_1, b_2, ...]
  Matrix M(n, n);
  {
    int col = 0;
    for (int i = 0; i < m; ++i) {
      Vector v = B.col(i);
      for (int k = 0; k < fm.r[i]; ++k) {
        M.col(col++) = v;
        v = A * v;
      }
    }
  }
  const Matrix M_inv = M.fullPivLu().inverse();

  // Flat output rows: last row of each block of M^{-1}, normalized so the
  // largest entry is +1 (the output scale is otherwise arbitrary).
  fm.C_f.resize(m, n);
  {
    int last = -1;
    for (int i = 0; i < m; ++i) {
      last += fm.r[i];
      Eigen::RowVectorXd q = M_inv.row(last);
      Eigen::Index arg = 0;
      q.cwiseAbs().maxCoeff(&arg);
      q /= q(arg);
      fm.C_f.row(i) = q;
    }
  }

  fm.T_z.resize(n, n);
  Matrix top_state(m, n);  // rows q_i^T A^{r_i}
  Matrix decoupling(m, m);  // rows q_i^T A^{r_i - 1} B
  {
    int row = 0;
    for (int i = 0; i < m; ++i) {
      Eigen::RowVectorXd q = fm.C_f.row(i);
      for (int k = 0; k < fm.r[i]; ++k) {
        fm.T_z.row(row++) = q;
        if (k + 1 == fm.r[i]) decoupling.row(i) = q * B;
        q = q * A;
      }
      top_state.row(i) = q;
    }
  }

  Eigen::FullPivLU<Matrix> tz_lu(fm.T_z);
  Eigen::FullPivLU<Matrix> dec_lu(decoupling);
  if (!tz_lu.isInvertible() || !dec_lu.isInvertible()) {
    throw UncontrollableSystem(numerical_rank(fm.T_z), n);
  }
  fm.Xi_x = tz_lu.inverse();
  fm.Xi_u_top = dec_lu.inverse();
  fm.Xi_u_z = -fm.Xi_u_top * top_state * fm.Xi_x;

  // Equilibrium of the drift. Prefer x_off = 0 (flat outputs stay the
  // physical ones) and fall back to the minimum-norm solution of [A B].
  fm.x_off = Vector::Zero(n);
  fm.u_off = Vector::Zero(m);
  if (sys.d().squaredNorm() > 0.0) {
    const double scale = 1.0 + sys.d().norm();
    Vector u = B.colPivHouseholderQr().solve(-sys.d());
    if ((B * u + sys.d()).norm() <= 1e-10 * scale) {
      fm.u_off = u;
    } else {
      Matrix AB(n, n + m);
      AB << A, B;
      Vector sol = AB.completeOrthogonalDecomposition().solve(-sys.d());
      fm.x_off = sol.head(n);
      fm.u_off = sol.tail(m);
    }
  }
  return fm;
}

}  // namespace flatpoly
