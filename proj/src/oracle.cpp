#include "npasa/oracle.hpp"

#include "npasa/qp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>

namespace npasa::oracle {

namespace {

// All size-k index subsets of {0, ..., pool-1}, invoking fn on each.
template <typename Fn>
void for_each_combination(int pool, int k, Fn&& fn) {
  std::vector<int> idx(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
  if (k == 0) {
    fn(idx);
    return;
  }
  if (k > pool) return;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<size_t>(i)] == pool - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
  }
}

}  // namespace

BruteForceQpResult brute_force_qp(const DenseQp& qp) {
  qp.poly.validate();
  const int n = qp.poly.n();
  if (qp.H.rows() != n || qp.H.cols() != n || qp.g.size() != n) throw DimensionError("brute_force_qp: H/g shape");
  if ((qp.H - qp.H.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + qp.H.lpNorm<Eigen::Infinity>()))
    throw std::invalid_argument("brute_force_qp: H must be symmetric");
  if (n > 10) throw std::invalid_argument("brute_force_qp: n exceeds the enumeration bound");

  const qp::PolyhedronConstraints pc = qp::polyhedron_constraints(qp.poly);
  const int mc = static_cast<int>(pc.constraints.size());
  if (mc > 24) throw std::invalid_argument("brute_force_qp: constraint count exceeds the enumeration bound");

  std::vector<int> eq_idx, ineq_idx;
  for (int i = 0; i < mc; ++i) {
    if (pc.constraints[static_cast<size_t>(i)].kind == qp::ConstraintKind::Equality)
      eq_idx.push_back(i);
    else
      ineq_idx.push_back(i);
  }

  std::optional<BruteForceQpResult> best;

  auto try_subset = [&](const std::vector<int>& subset) {
    const int k = static_cast<int>(eq_idx.size() + subset.size());
    Matrix C(k, n);
    Vector b(k);
    std::vector<int> cons_of_row(static_cast<size_t>(k));
    int row = 0;
    for (int e : eq_idx) {
      C.row(row) = pc.constraints[static_cast<size_t>(e)].normal.transpose();
      b[row] = pc.constraints[static_cast<size_t>(e)].rhs;
      cons_of_row[static_cast<size_t>(row)] = e;
      ++row;
    }
    for (int pos : subset) {
      const int i = ineq_idx[static_cast<size_t>(pos)];
      C.row(row) = pc.constraints[static_cast<size_t>(i)].normal.transpose();
      b[row] = pc.constraints[static_cast<size_t>(i)].rhs;
      cons_of_row[static_cast<size_t>(row)] = i;
      ++row;
    }
    if (k > 0) {
      Eigen::FullPivLU<Matrix> lu(C);
      lu.setThreshold(1e-10);
      if (lu.rank() < k) return;
    }

    Matrix kkt = Matrix::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = qp.H;
    if (k > 0) {
      kkt.topRightCorner(n, k) = -C.transpose();
      kkt.bottomLeftCorner(k, n) = C;
    }
    Vector rhs(n + k);
    rhs.head(n) = -qp.g;
    rhs.tail(k) = b;
    Eigen::FullPivLU<Matrix> solver(kkt);
    if (!solver.isInvertible()) return;
    const Vector sol = solver.solve(rhs);
    const Vector x = sol.head(n);
    const Vector omega = sol.tail(k);
    if (!x.allFinite()) return;

    const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
    for (int i = 0; i < mc; ++i) {
      const auto& c = pc.constraints[static_cast<size_t>(i)];
      const double s = c.normal.dot(x) - c.rhs;
      if (c.kind == qp::ConstraintKind::Equality) {
        if (std::abs(s) > 1e-8 * scale) return;
      } else if (s < -1e-8 * scale) {
        return;
      }
    }
    for (int j = static_cast<int>(eq_idx.size()); j < k; ++j) {
      if (omega[j] < -1e-9) return;
    }

    const double obj = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
    if (!best || obj < best->objective - 1e-14 * (1.0 + std::abs(obj))) {
      Vector per_constraint = Vector::Zero(mc);
      for (int j = 0; j < k; ++j) per_constraint[cons_of_row[static_cast<size_t>(j)]] = omega[j];
      BruteForceQpResult cand;
      cand.x = x;
      cand.mu_stacked = qp::scatter_multipliers(qp.poly, pc, per_constraint);
      cand.objective = obj;
      best = std::move(cand);
    }
  };

  const int max_extra = n - static_cast<int>(eq_idx.size());
  for (int k = 0; k <= std::max(0, max_extra); ++k) {
    for_each_combination(static_cast<int>(ineq_idx.size()), k, try_subset);
  }
  if (!best) throw InfeasibleError("brute_force_qp: no feasible KKT candidate found");
  return *best;
}

Vector enumerate_em1_eta(const NlpProblem& p, const Vector& z, const Vector& nu, int max_rows) {
  Vector g0 = p.eval_grad_f(z);
  if (p.ell > 0) g0 += p.eval_jac_h(z).transpose() * nu;
  const Vector r = p.omega.stacked_residual(z);
  const auto finite = p.omega.finite_rows();
  const int m = p.omega.stacked_size();
  const int n = p.omega.n();
  const int nr = p.omega.rows();

  std::vector<int> rows;
  for (int i = 0; i < m; ++i) {
    if (finite[static_cast<size_t>(i)]) rows.push_back(i);
  }
  const int mf = static_cast<int>(rows.size());
  if (mf > max_rows) throw std::invalid_argument("enumerate_em1_eta: too many finite rows");
  if (mf == 0) return Vector::Zero(m);

  // Column i of B is the gradient of the i-th stacked residual row.
  Matrix B(n, mf);
  Vector a(mf);
  for (int j = 0; j < mf; ++j) {
    const int i = rows[static_cast<size_t>(j)];
    Vector col = Vector::Zero(n);
    if (i < nr) {
      col = -p.omega.A.row(i).transpose();
    } else if (i < 2 * nr) {
      col = p.omega.A.row(i - nr).transpose();
    } else if (i < 2 * nr + n) {
      col[i - 2 * nr] = -1.0;
    } else {
      col[i - 2 * nr - n] = 1.0;
    }
    B.col(j) = col;
    a[j] = std::max(-r[i], 0.0);
  }

  auto objective = [&](const Vector& eta) {
    const Vector resid = g0 + B * eta;
    double val = resid.squaredNorm();
    for (int j = 0; j < mf; ++j) val += std::min(a[j], eta[j]) * std::min(a[j], eta[j]);
    return val;
  };

  // Per-coordinate states: fixed at 0, fixed at the kink a_j, free inside
  // the penalized piece [0, a_j], or free beyond it.
  enum { kAtZero = 0, kAtKink = 1, kFreeInside = 2, kFreeOutside = 3 };
  std::vector<int> state(static_cast<size_t>(mf), 0);
  Vector best_eta = Vector::Zero(mf);
  double best_val = objective(best_eta);

  const long total = static_cast<long>(std::pow(4.0, mf));
  for (long code = 0; code < total; ++code) {
    long rem = code;
    for (int j = 0; j < mf; ++j) {
      state[static_cast<size_t>(j)] = static_cast<int>(rem % 4);
      rem /= 4;
    }
    std::vector<int> free_idx;
    Vector eta = Vector::Zero(mf);
    Vector offset = g0;
    for (int j = 0; j < mf; ++j) {
      switch (state[static_cast<size_t>(j)]) {
        case kAtZero:
          break;
        case kAtKink:
          eta[j] = a[j];
          offset += B.col(j) * a[j];
          break;
        default:
          free_idx.push_back(j);
      }
    }
    if (!free_idx.empty()) {
      const int kf = static_cast<int>(free_idx.size());
      int pen = 0;
      for (int j : free_idx) {
        if (state[static_cast<size_t>(j)] == kFreeInside) ++pen;
      }
      Matrix M = Matrix::Zero(n + pen, kf);
      Vector rhs = Vector::Zero(n + pen);
      rhs.head(n) = -offset;
      int prow = n;
      for (int col = 0; col < kf; ++col) {
        const int j = free_idx[static_cast<size_t>(col)];
        M.col(col).head(n) = B.col(j);
        if (state[static_cast<size_t>(j)] == kFreeInside) {
          M(prow, col) = 1.0;
          ++prow;
        }
      }
      const Vector t = M.colPivHouseholderQr().solve(rhs);
      if (!t.allFinite()) continue;
      bool valid = true;
      for (int col = 0; col < kf && valid; ++col) {
        const int j = free_idx[static_cast<size_t>(col)];
        const double v = t[col];
        if (state[static_cast<size_t>(j)] == kFreeInside) {
          valid = v >= -1e-9 && v <= a[j] + 1e-9 * (1.0 + a[j]);
        } else {
          valid = v >= a[j] - 1e-9 * (1.0 + a[j]);
        }
        eta[j] = std::max(v, 0.0);
      }
      if (!valid) continue;
    }
    const double val = objective(eta);
    if (val < best_val) {
      best_val = val;
      best_eta = eta;
    }
  }

  Vector full = Vector::Zero(m);
  for (int j = 0; j < mf; ++j) full[rows[static_cast<size_t>(j)]] = best_eta[j];
  return full;
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h_step) {
  if (h_step < 1e-8 || h_step > 1e-4) throw std::invalid_argument("finite_diff_gradient: h_step out of range");
  const int n = static_cast<int>(x.size());
  Vector g(n);
  for (int i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp[i] += h_step;
    xm[i] -= h_step;
    g[i] = (f(xp) - f(xm)) / (2.0 * h_step);
  }
  if (!g.allFinite()) throw EvaluationError("finite_diff_gradient: NaN encountered");
  return g;
}

Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h_step) {
  if (h_step < 1e-8 || h_step > 1e-4) throw std::invalid_argument("finite_diff_jacobian: h_step out of range");
  const int n = static_cast<int>(x.size());
  Matrix J;
  for (int i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp[i] += h_step;
    xm[i] -= h_step;
    const Vector col = (f(xp) - f(xm)) / (2.0 * h_step);
    if (J.size() == 0) J.resize(col.size(), n);
    J.col(i) = col;
  }
  if (!J.allFinite()) throw EvaluationError("finite_diff_jacobian: NaN encountered");
  return J;
}

}  // namespace npasa::oracle
