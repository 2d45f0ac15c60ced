#include "npasa/subsolve.hpp"

#include "npasa/oracle.hpp"
#include "npasa/projection.hpp"
#include "npasa/qp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace npasa {

namespace {

constexpr double kArmijoSlope = 1e-4;

Matrix fd_hessian(const std::function<Vector(const Vector&)>& gradient, const Vector& x) {
  const int n = static_cast<int>(x.size());
  Matrix H(n, n);
  for (int j = 0; j < n; ++j) {
    const double step = 1e-5 * (1.0 + std::abs(x[j]));
    Vector xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    H.col(j) = (gradient(xp) - gradient(xm)) / (2.0 * step);
  }
  return 0.5 * (H + H.transpose());
}

// Largest step in [0, 1] from x along s keeping every inactive canonical
// constraint satisfied. Returns the blocking constraint index, or -1.
double max_feasible_step(const qp::PolyhedronConstraints& pc, const std::vector<char>& active, const Vector& x,
                         const Vector& s, int* blocker) {
  double amax = 1.0;
  *blocker = -1;
  for (size_t i = 0; i < pc.constraints.size(); ++i) {
    if (active[i]) continue;
    const auto& c = pc.constraints[i];
    const double ds = c.normal.dot(s);
    if (ds >= -1e-15 * (1.0 + s.lpNorm<Eigen::Infinity>())) continue;
    const double slack = c.normal.dot(x) - c.rhs;
    const double a = std::max(slack, 0.0) / (-ds);
    if (a < amax) {
      amax = a;
      *blocker = static_cast<int>(i);
    }
  }
  return amax;
}

// Newton step restricted to the face of constraints active at x. Returns
// true when a point with sufficient decrease was found.
bool newton_face_step(const SmoothObjective& obj, const qp::PolyhedronConstraints& pc, const Vector& x,
                      const Vector& g, double fx, Vector* x_out, double* f_out) {
  const int n = static_cast<int>(x.size());
  std::vector<char> active(pc.constraints.size(), 0);
  int n_active = 0;
  for (size_t i = 0; i < pc.constraints.size(); ++i) {
    const auto& c = pc.constraints[i];
    const double s = c.normal.dot(x) - c.rhs;
    if (c.kind == qp::ConstraintKind::Equality || std::abs(s) <= 1e-8 * (1.0 + std::abs(c.rhs))) {
      active[i] = 1;
      ++n_active;
    }
  }
  Matrix Z;
  if (n_active == 0) {
    Z = Matrix::Identity(n, n);
  } else {
    Matrix C(n_active, n);
    int row = 0;
    for (size_t i = 0; i < pc.constraints.size(); ++i) {
      if (active[i]) C.row(row++) = pc.constraints[i].normal.transpose();
    }
    Eigen::FullPivLU<Matrix> lu(C);
    lu.setThreshold(1e-12);
    Z = lu.kernel();
    if (lu.dimensionOfKernel() == 0) return false;
  }
  const Vector gr = Z.transpose() * g;
  if (gr.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + g.lpNorm<Eigen::Infinity>())) return false;

  const Matrix H = obj.hessian ? obj.hessian(x) : fd_hessian(obj.gradient, x);
  const Matrix Hr = Z.transpose() * H * Z;
  Vector t;
  bool have_newton = false;
  Eigen::LDLT<Matrix> ldlt(Hr);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    t = ldlt.solve(-gr);
    have_newton = t.allFinite() && t.dot(gr) < 0;
  }
  if (!have_newton) {
    t = -gr / (1.0 + Hr.lpNorm<Eigen::Infinity>());
  }
  Vector s = Z * t;
  const double gs = g.dot(s);
  if (gs >= 0 || s.lpNorm<Eigen::Infinity>() <= 1e-16 * (1.0 + x.lpNorm<Eigen::Infinity>())) return false;

  int blocker = -1;
  double a = max_feasible_step(pc, active, x, s, &blocker);
  if (a <= 0) return false;
  for (int bt = 0; bt < 40; ++bt) {
    const Vector xt = x + a * s;
    const double ft = obj.value(xt);
    if (std::isfinite(ft) && ft <= fx + kArmijoSlope * a * gs) {
      *x_out = xt;
      *f_out = ft;
      return true;
    }
    a *= 0.5;
  }
  return false;
}

}  // namespace

SubsolveReport minimize_over_polyhedron(const SmoothObjective& obj, const Polyhedron& poly, Vector x0,
                                        double inner_tol, int max_iters) {
  if (inner_tol <= 0) throw std::invalid_argument("minimize_over_polyhedron: inner_tol must be positive");
  if (max_iters <= 0) max_iters = 500;
  Vector x = std::move(x0);
  if (!poly.is_feasible(x, 1e-9)) x = project(poly, x).y_star;
  double fx = obj.value(x);
  if (!std::isfinite(fx)) throw EvaluationError("minimize_over_polyhedron: objective is not finite at start");

  const qp::PolyhedronConstraints pc = qp::polyhedron_constraints(poly);
  SubsolveReport rep;
  double t_pg = 0;
  int it = 0;
  for (; it < max_iters; ++it) {
    const Vector g = obj.gradient(x);
    if (!g.allFinite()) throw EvaluationError("minimize_over_polyhedron: gradient is not finite");
    const Vector y = project(poly, x - g).y_star;
    rep.projected_gradient_norm = (x - y).norm();
    if (rep.projected_gradient_norm <= inner_tol) {
      rep.status = SubsolveStatus::Stationary;
      break;
    }

    Vector x_new;
    double f_new = fx;
    bool moved = newton_face_step(obj, pc, x, g, fx, &x_new, &f_new);

    if (!moved) {
      double t = t_pg > 0 ? 4.0 * t_pg : 1.0 / (1.0 + g.norm());
      for (int bt = 0; bt < 60; ++bt) {
        const Vector xt = project(poly, x - t * g).y_star;
        const Vector d = xt - x;
        const double ft = obj.value(xt);
        if (std::isfinite(ft) && d.norm() > 0 && ft <= fx + kArmijoSlope * g.dot(d)) {
          x_new = xt;
          f_new = ft;
          t_pg = t;
          moved = true;
          break;
        }
        t *= 0.5;
      }
    }
    if (!moved) break;  // numerical floor: no acceptable decrease in any direction
    x = x_new;
    fx = f_new;
  }
  if (rep.status != SubsolveStatus::Stationary) {
    const Vector g = obj.gradient(x);
    rep.projected_gradient_norm = (x - project(poly, x - g).y_star).norm();
    if (rep.projected_gradient_norm <= inner_tol) rep.status = SubsolveStatus::Stationary;
  }
  rep.minimizer = std::move(x);
  rep.iterations = it;
  return rep;
}

namespace {

// Columns of the stacked residual Jacobian transpose for the finite rows.
struct StackedColumns {
  Matrix B;  // n x mf
  Vector r;  // residuals of the finite rows
  std::vector<int> rows;
};

StackedColumns finite_stacked_columns(const Polyhedron& poly, const Vector& z) {
  StackedColumns out;
  const Vector r = poly.stacked_residual(z);
  const auto finite = poly.finite_rows();
  const int n = poly.n();
  const int nr = poly.rows();
  for (int i = 0; i < r.size(); ++i) {
    if (finite[static_cast<size_t>(i)]) out.rows.push_back(i);
  }
  const int mf = static_cast<int>(out.rows.size());
  out.B.resize(n, mf);
  out.r.resize(mf);
  for (int j = 0; j < mf; ++j) {
    const int i = out.rows[static_cast<size_t>(j)];
    Vector col = Vector::Zero(n);
    if (i < nr) {
      col = -poly.A.row(i).transpose();
    } else if (i < 2 * nr) {
      col = poly.A.row(i - nr).transpose();
    } else if (i < 2 * nr + n) {
      col[i - 2 * nr] = -1.0;
    } else {
      col[i - 2 * nr - n] = 1.0;
    }
    out.B.col(j) = col;
    out.r[j] = r[i];
  }
  return out;
}

}  // namespace

namespace {

// Lawson-Hanson nonnegative least squares, min ||M v - t||^2 with the first
// n_free coordinates unconstrained. Active coordinates exit exactly at 0.
Vector nnls_with_free_head(const Matrix& M, const Vector& t, int n_free) {
  const int nv = static_cast<int>(M.cols());
  std::vector<char> passive(static_cast<size_t>(nv), 0);
  for (int i = 0; i < n_free; ++i) passive[static_cast<size_t>(i)] = 1;

  auto solve_passive = [&]() {
    std::vector<int> idx;
    for (int i = 0; i < nv; ++i) {
      if (passive[static_cast<size_t>(i)]) idx.push_back(i);
    }
    Vector full = Vector::Zero(nv);
    if (idx.empty()) return full;
    Matrix Mp(M.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) Mp.col(static_cast<Eigen::Index>(j)) = M.col(idx[j]);
    const Vector sol = Mp.colPivHouseholderQr().solve(t);
    for (size_t j = 0; j < idx.size(); ++j) full[idx[j]] = sol[static_cast<Eigen::Index>(j)];
    return full;
  };

  Vector v = solve_passive();
  for (int i = n_free; i < nv; ++i) v[i] = std::max(v[i], 0.0);
  const double w_scale = 1.0 + (M.transpose() * t).lpNorm<Eigen::Infinity>();
  const int max_iters = 40 * (nv + 1);
  for (int iter = 0; iter < max_iters; ++iter) {
    const Vector w = M.transpose() * (t - M * v);
    int best = -1;
    double best_w = 1e-13 * w_scale;
    for (int i = n_free; i < nv; ++i) {
      if (!passive[static_cast<size_t>(i)] && w[i] > best_w) {
        best_w = w[i];
        best = i;
      }
    }
    if (best < 0) return v;
    passive[static_cast<size_t>(best)] = 1;
    for (int inner = 0; inner < max_iters; ++inner) {
      const Vector cand = solve_passive();
      double alpha = 1.0;
      int blocker = -1;
      for (int i = n_free; i < nv; ++i) {
        if (!passive[static_cast<size_t>(i)] || cand[i] >= 0) continue;
        const double a = v[i] / (v[i] - cand[i]);
        if (a < alpha) {
          alpha = a;
          blocker = i;
        }
      }
      if (blocker < 0) {
        v = cand;
        break;
      }
      v += alpha * (cand - v);
      for (int i = n_free; i < nv; ++i) {
        if (passive[static_cast<size_t>(i)] && v[i] <= 1e-14 * (1.0 + std::abs(cand[i]))) {
          passive[static_cast<size_t>(i)] = 0;
          v[i] = 0.0;
        }
      }
    }
  }
  throw SubsolverFailure("nnls: iteration limit");
}

}  // namespace

Em0Solution minimize_em0_regularized(const NlpProblem& p, const Vector& z, double gamma) {
  if (gamma <= 0) throw std::invalid_argument("minimize_em0_regularized: gamma must be positive");
  const Vector g0 = p.eval_grad_f(z);
  const Matrix Jh = p.eval_jac_h(z);
  const StackedColumns sc = finite_stacked_columns(p.omega, z);
  const int mf = static_cast<int>(sc.rows.size());
  const int nvars = p.ell + mf;

  Matrix B(p.n, nvars);
  if (p.ell > 0) B.leftCols(p.ell) = Jh.transpose();
  if (mf > 0) B.rightCols(mf) = sc.B;

  // Completing the square in eta turns the objective into a pure least
  // squares problem, which stays accurate for tiny gamma:
  //   ||g0 + B v||^2 + gamma ||nu||^2 + sum_i gamma (eta_i - r_i/(2 gamma))^2.
  const double sg = std::sqrt(gamma);
  Matrix M = Matrix::Zero(p.n + nvars, nvars);
  M.topRows(p.n) = B;
  M.bottomRows(nvars) = sg * Matrix::Identity(nvars, nvars);
  Vector t = Vector::Zero(p.n + nvars);
  t.head(p.n) = -g0;
  for (int j = 0; j < mf; ++j) t[p.n + p.ell + j] = sc.r[j] / (2.0 * sg);

  const Vector v = nnls_with_free_head(M, t, p.ell);

  Em0Solution out;
  out.nu = v.head(p.ell);
  out.eta = Vector::Zero(p.omega.stacked_size());
  for (int j = 0; j < mf; ++j) out.eta[sc.rows[static_cast<size_t>(j)]] = v[p.ell + j];
  double obj = (g0 + B * v).squaredNorm() + gamma * v.squaredNorm();
  for (int j = 0; j < mf; ++j) obj -= v[p.ell + j] * sc.r[j];
  out.objective = obj;
  return out;
}

namespace {

struct Em1Problem {
  Vector g0;
  Matrix B;  // n x mf
  Vector a;  // kink locations, >= 0
  int mf = 0;

  double value(const Vector& eta) const {
    const Vector resid = g0 + B * eta;
    double v = resid.squaredNorm();
    for (int j = 0; j < mf; ++j) {
      const double phi = std::min(a[j], eta[j]);
      v += phi * phi;
    }
    return v;
  }

  Vector gradient(const Vector& eta) const {
    Vector g = 2.0 * (B.transpose() * (g0 + B * eta));
    for (int j = 0; j < mf; ++j) {
      if (eta[j] <= a[j]) g[j] += 2.0 * eta[j];
    }
    return g;
  }

  double stationarity(const Vector& eta) const {
    const Vector g = gradient(eta);
    return ((eta - g).cwiseMax(0.0) - eta).norm();
  }
};

// Projected gradient with Armijo backtracking on eta >= 0.
void em1_projected_gradient(const Em1Problem& prob, Vector& eta, double& fval, double inner_tol, int max_iters) {
  double t = 0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector g = prob.gradient(eta);
    if (((eta - g).cwiseMax(0.0) - eta).norm() <= inner_tol) return;
    double step = t > 0 ? 4.0 * t : 1.0 / (1.0 + g.norm());
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector etat = (eta - step * g).cwiseMax(0.0);
      const Vector d = etat - eta;
      if (d.norm() == 0) {
        step *= 0.5;
        continue;
      }
      const double ft = prob.value(etat);
      if (ft <= fval + kArmijoSlope * g.dot(d)) {
        eta = etat;
        fval = ft;
        t = step;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return;
  }
}

// Cyclic coordinate descent with the exact one-dimensional minimizer per
// coordinate: phi(t) = ||rho + b t||^2 + min(a, t)^2 is piecewise quadratic
// with a single kink at a, so its constrained minimum over t >= 0 is one of
// the two clamped piece minimizers.
void em1_coordinate_descent(const Em1Problem& prob, Vector& eta, double& fval, int max_sweeps) {
  Vector resid = prob.g0 + prob.B * eta;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0;
    for (int j = 0; j < prob.mf; ++j) {
      const Vector b = prob.B.col(j);
      const double bb = b.squaredNorm();
      const double a = prob.a[j];
      const double old = eta[j];
      const Vector rho = resid - b * old;
      const double rb = rho.dot(b);

      auto piece_value = [&](double t) {
        const double phi = std::min(a, t);
        return (rho + b * t).squaredNorm() + phi * phi;
      };
      double best_t = 0;
      double best_v = piece_value(0.0);
      const double t1 = std::clamp(-rb / (bb + 1.0), 0.0, a);
      if (piece_value(t1) < best_v) {
        best_v = piece_value(t1);
        best_t = t1;
      }
      const double t2 = bb > 0 ? std::max(-rb / bb, a) : a;
      if (piece_value(t2) < best_v) {
        best_v = piece_value(t2);
        best_t = t2;
      }
      if (best_t != old) {
        eta[j] = best_t;
        resid = rho + b * best_t;
        moved += std::abs(best_t - old);
      }
    }
    if (moved <= 1e-15 * (1.0 + eta.lpNorm<Eigen::Infinity>())) break;
  }
  fval = prob.value(eta);
}

// Exact least-squares refit on the smooth piece containing eta, accepted
// only on decrease. Coordinates pinned at 0 or at the kink stay fixed.
void em1_piece_polish(const Em1Problem& prob, Vector& eta, double& fval) {
  for (int round = 0; round < 12; ++round) {
    std::vector<int> free_idx;
    std::vector<char> penalized;
    Vector offset = prob.g0;
    for (int j = 0; j < prob.mf; ++j) {
      const double tol = 1e-12 * (1.0 + prob.a[j]);
      if (eta[j] <= tol || std::abs(eta[j] - prob.a[j]) <= tol) {
        offset += prob.B.col(j) * eta[j];
      } else {
        free_idx.push_back(j);
        penalized.push_back(eta[j] < prob.a[j] ? 1 : 0);
      }
    }
    if (free_idx.empty()) return;
    const int kf = static_cast<int>(free_idx.size());
    int pen = 0;
    for (char c : penalized) pen += c;
    const int n = static_cast<int>(prob.g0.size());
    Matrix M = Matrix::Zero(n + pen, kf);
    Vector rhs = Vector::Zero(n + pen);
    rhs.head(n) = -offset;
    int prow = n;
    for (int col = 0; col < kf; ++col) {
      M.col(col).head(n) = prob.B.col(free_idx[static_cast<size_t>(col)]);
      if (penalized[static_cast<size_t>(col)]) {
        M(prow, col) = 1.0;
        ++prow;
      }
    }
    const Vector t = M.colPivHouseholderQr().solve(rhs);
    if (!t.allFinite()) return;
    Vector target = eta;
    for (int col = 0; col < kf; ++col) target[free_idx[static_cast<size_t>(col)]] = std::max(t[col], 0.0);

    // Back off toward the current point until the exact value decreases.
    bool improved = false;
    double frac = 1.0;
    for (int bt = 0; bt < 10; ++bt) {
      const Vector cand = eta + frac * (target - eta);
      const double fc = prob.value(cand);
      if (fc < fval - 1e-16 * (1.0 + std::abs(fval))) {
        eta = cand;
        fval = fc;
        improved = true;
        break;
      }
      frac *= 0.5;
    }
    if (!improved) return;
  }
}

}  // namespace

Em1EtaSolution minimize_em1_over_eta(const NlpProblem& p, const Vector& z, const Vector& nu, const Vector* eta_warm,
                                     double inner_tol, bool exact_enumeration) {
  Vector g0 = p.eval_grad_f(z);
  if (p.ell > 0) g0 += p.eval_jac_h(z).transpose() * nu;
  const StackedColumns sc = finite_stacked_columns(p.omega, z);
  Em1Problem prob;
  prob.g0 = g0;
  prob.B = sc.B;
  prob.a = (-sc.r).cwiseMax(0.0);
  prob.mf = static_cast<int>(sc.rows.size());

  Em1EtaSolution out;
  out.eta = Vector::Zero(p.omega.stacked_size());
  if (prob.mf == 0) {
    out.em1 = g0.squaredNorm();
    return out;
  }

  std::vector<Vector> starts;
  starts.emplace_back(Vector::Zero(prob.mf));
  if (eta_warm != nullptr) {
    if (eta_warm->size() != p.omega.stacked_size())
      throw DimensionError("minimize_em1_over_eta: warm start has wrong length");
    Vector w(prob.mf);
    for (int j = 0; j < prob.mf; ++j) w[j] = std::max((*eta_warm)[sc.rows[static_cast<size_t>(j)]], 0.0);
    starts.push_back(std::move(w));
  }
  // Clamped least-squares fit of the stationarity term alone.
  starts.emplace_back(prob.B.colPivHouseholderQr().solve(-prob.g0).cwiseMax(0.0));

  Vector best;
  double best_val = kInf;
  for (Vector& eta : starts) {
    double fval = prob.value(eta);
    em1_coordinate_descent(prob, eta, fval, 200);
    em1_piece_polish(prob, eta, fval);
    em1_coordinate_descent(prob, eta, fval, 50);
    em1_projected_gradient(prob, eta, fval, inner_tol, 100);
    if (fval < best_val) {
      best_val = fval;
      best = eta;
    }
  }

  if (exact_enumeration && prob.mf <= 12) {
    const Vector cand_full = oracle::enumerate_em1_eta(p, z, nu, 12);
    Vector cand(prob.mf);
    for (int j = 0; j < prob.mf; ++j) cand[j] = cand_full[sc.rows[static_cast<size_t>(j)]];
    const double fc = prob.value(cand);
    if (fc < best_val) {
      best_val = fc;
      best = cand;
    }
  }

  for (int j = 0; j < prob.mf; ++j) out.eta[sc.rows[static_cast<size_t>(j)]] = best[j];
  out.em1 = best_val;
  return out;
}

LeastDistanceResult least_distance_linearized(const Polyhedron& poly, const Vector& w_i, const Vector& h_i,
                                              const Matrix& J_i, double p_i) {
  if (p_i < 1.0) throw std::invalid_argument("least_distance_linearized: p must be >= 1");
  const int n = poly.n();
  const int ell = static_cast<int>(h_i.size());
  if (w_i.size() != n) throw DimensionError("least_distance_linearized: w has wrong length");
  if (J_i.rows() != ell || J_i.cols() != n) throw DimensionError("least_distance_linearized: Jacobian shape");
  if (!poly.is_feasible(w_i, 1e-7)) throw std::invalid_argument("least_distance_linearized: w_i must be feasible");

  const double srp = std::sqrt(p_i);
  const qp::PolyhedronConstraints pc = qp::polyhedron_constraints(poly);
  const int mc = static_cast<int>(pc.constraints.size());

  std::vector<char> in_ws(static_cast<size_t>(mc), 0);
  std::vector<int> ws;
  for (int i = 0; i < mc; ++i) {
    if (pc.constraints[static_cast<size_t>(i)].kind == qp::ConstraintKind::Equality) {
      ws.push_back(i);
      in_ws[static_cast<size_t>(i)] = 1;
    }
  }

  Vector d = Vector::Zero(n);
  const int max_iters = 60 * (mc + n + 2);
  bool converged = false;
  for (int iter = 0; iter < max_iters && !converged; ++iter) {
    Matrix Z;
    const int k = static_cast<int>(ws.size());
    if (k == 0) {
      Z = Matrix::Identity(n, n);
    } else {
      Matrix C(k, n);
      for (int j = 0; j < k; ++j) C.row(j) = pc.constraints[static_cast<size_t>(ws[static_cast<size_t>(j)])].normal.transpose();
      Eigen::FullPivLU<Matrix> lu(C);
      lu.setThreshold(1e-12);
      // kernel() returns one zero column when the kernel is trivial.
      Z = lu.dimensionOfKernel() > 0 ? Matrix(lu.kernel()) : Matrix(n, 0);
    }

    Vector s = Vector::Zero(n);
    if (Z.cols() > 0) {
      // min ||d+s||^2 + p ||h + J(d+s)||^2 over s in range(Z), in square-root
      // form so large p stays well conditioned.
      Matrix M(n + ell, Z.cols());
      M.topRows(n) = Z;
      if (ell > 0) M.bottomRows(ell) = srp * (J_i * Z);
      Vector rhs(n + ell);
      rhs.head(n) = -d;
      if (ell > 0) rhs.tail(ell) = -srp * (h_i + J_i * d);
      const Vector t = M.colPivHouseholderQr().solve(rhs);
      s = Z * t;
    }

    if (s.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + d.lpNorm<Eigen::Infinity>())) {
      if (ws.empty()) {
        converged = true;
        break;
      }
      Vector gq = 2.0 * d;
      if (ell > 0) gq += 2.0 * p_i * (J_i.transpose() * (h_i + J_i * d));
      const int kk = static_cast<int>(ws.size());
      Matrix Ct(n, kk);
      for (int j = 0; j < kk; ++j) Ct.col(j) = pc.constraints[static_cast<size_t>(ws[static_cast<size_t>(j)])].normal;
      // Minimum-norm least-squares multipliers behave best on degenerate
      // working sets.
      const Vector omega = Ct.completeOrthogonalDecomposition().solve(gq);
      int worst = -1;
      double worst_val = -1e-9 * (1.0 + gq.lpNorm<Eigen::Infinity>());
      for (int j = 0; j < kk; ++j) {
        if (pc.constraints[static_cast<size_t>(ws[static_cast<size_t>(j)])].kind == qp::ConstraintKind::Equality)
          continue;
        if (omega[j] < worst_val) {
          worst_val = omega[j];
          worst = j;
        }
      }
      if (worst < 0) {
        converged = true;
        break;
      }
      in_ws[static_cast<size_t>(ws[static_cast<size_t>(worst)])] = 0;
      ws.erase(ws.begin() + worst);
      continue;
    }

    double amax = 1.0;
    int blocker = -1;
    const Vector point = w_i + d;
    for (int i = 0; i < mc; ++i) {
      if (in_ws[static_cast<size_t>(i)]) continue;
      const auto& c = pc.constraints[static_cast<size_t>(i)];
      const double ds = c.normal.dot(s);
      if (ds >= -1e-15 * (1.0 + s.lpNorm<Eigen::Infinity>())) continue;
      const double slack = std::max(c.normal.dot(point) - c.rhs, 0.0);
      const double a = slack / (-ds);
      if (a < amax) {
        amax = a;
        blocker = i;
      }
    }
    d += amax * s;
    if (blocker >= 0) {
      ws.push_back(blocker);
      in_ws[static_cast<size_t>(blocker)] = 1;
    }
  }
  if (!converged) throw SubsolverFailure("least_distance_linearized: active-set iteration limit");

  LeastDistanceResult out;
  out.w_bar = w_i + d;
  out.y = ell > 0 ? Vector(-h_i - J_i * d) : Vector(0);
  return out;
}

}  // namespace npasa
