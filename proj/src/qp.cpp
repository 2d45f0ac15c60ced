#include "npasa/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace npasa::qp {

namespace {

constexpr double kDependentTol = 1e-16;  // ||z||^2 / ||v||^2 below this means the normal lies in span(W)
constexpr double kDualTol = 1e-13;       // r_j threshold for dual step candidates

struct Workspace {
  const Eigen::LLT<Matrix>* llt;
  std::vector<int> members;       // constraint indices in the working set
  std::vector<double> signs;      // effective-normal sign per member
  std::vector<double> u;          // multipliers for the effective normals
  std::vector<double> rhs;        // effective right-hand sides
  std::vector<char> is_eq;        // equality flag per member
  Matrix bcols;                   // n x k cache of L^{-1} * effective normal
  int k = 0;

  void add(int idx, double sign, double mult, double rhs_eff, bool eq, const Vector& v) {
    members.push_back(idx);
    signs.push_back(sign);
    u.push_back(mult);
    rhs.push_back(rhs_eff);
    is_eq.push_back(eq ? 1 : 0);
    if (bcols.cols() <= k) bcols.conservativeResize(Eigen::NoChange, k + 4);
    bcols.col(k) = v;
    ++k;
  }

  void drop(int pos) {
    for (int j = pos; j + 1 < k; ++j) bcols.col(j) = bcols.col(j + 1);
    members.erase(members.begin() + pos);
    signs.erase(signs.begin() + pos);
    u.erase(u.begin() + pos);
    rhs.erase(rhs.begin() + pos);
    is_eq.erase(is_eq.begin() + pos);
    --k;
  }
};

}  // namespace

PolyhedronConstraints polyhedron_constraints(const Polyhedron& poly) {
  PolyhedronConstraints pc;
  const int nr = poly.rows();
  const int nv = poly.n();
  for (int j = 0; j < nr; ++j) {
    const Vector aj = poly.A.row(j).transpose();
    const double lo = poly.row_lo[j];
    const double hi = poly.row_hi[j];
    if (std::isfinite(lo) && lo == hi) {
      pc.constraints.push_back({aj, lo, ConstraintKind::Equality});
      pc.slots.push_back({j, 1.0});
      pc.equality_pair.push_back(true);
      continue;
    }
    if (std::isfinite(lo)) {
      pc.constraints.push_back({aj, lo, ConstraintKind::Inequality});
      pc.slots.push_back({j, 1.0});
      pc.equality_pair.push_back(false);
    }
    if (std::isfinite(hi)) {
      pc.constraints.push_back({-aj, -hi, ConstraintKind::Inequality});
      pc.slots.push_back({nr + j, 1.0});
      pc.equality_pair.push_back(false);
    }
  }
  for (int i = 0; i < nv; ++i) {
    Vector ei = Vector::Zero(nv);
    ei[i] = 1.0;
    const double lo = poly.box_lo[i];
    const double hi = poly.box_hi[i];
    if (std::isfinite(lo) && lo == hi) {
      pc.constraints.push_back({ei, lo, ConstraintKind::Equality});
      pc.slots.push_back({2 * nr + i, 1.0});
      pc.equality_pair.push_back(true);
      continue;
    }
    if (std::isfinite(lo)) {
      pc.constraints.push_back({ei, lo, ConstraintKind::Inequality});
      pc.slots.push_back({2 * nr + i, 1.0});
      pc.equality_pair.push_back(false);
    }
    if (std::isfinite(hi)) {
      pc.constraints.push_back({-ei, -hi, ConstraintKind::Inequality});
      pc.slots.push_back({2 * nr + nv + i, 1.0});
      pc.equality_pair.push_back(false);
    }
  }
  return pc;
}

Vector scatter_multipliers(const Polyhedron& poly, const PolyhedronConstraints& pc, const Vector& multipliers) {
  if (multipliers.size() != static_cast<Eigen::Index>(pc.constraints.size()))
    throw DimensionError("scatter_multipliers: multiplier count mismatch");
  const int nr = poly.rows();
  const int nv = poly.n();
  Vector mu = Vector::Zero(poly.stacked_size());
  for (size_t i = 0; i < pc.constraints.size(); ++i) {
    const double u = multipliers[static_cast<Eigen::Index>(i)];
    const int slot = pc.slots[i].index;
    if (pc.equality_pair[i]) {
      // Equality multiplier split between the lower and upper stacked slots.
      const int mirror = slot < 2 * nr ? slot + nr : slot + nv;
      if (u >= 0) {
        mu[slot] += u;
      } else {
        mu[mirror] += -u;
      }
    } else {
      mu[slot] += std::max(u, 0.0);
    }
  }
  return mu;
}

QpResult solve_strictly_convex_qp(const Matrix& H, const Vector& g, const std::vector<LinearConstraint>& constraints,
                                  int max_iters) {
  const int n = static_cast<int>(H.rows());
  if (H.cols() != n || g.size() != n) throw DimensionError("qp: H/g shape mismatch");
  for (const auto& c : constraints) {
    if (c.normal.size() != n) throw DimensionError("qp: constraint normal has wrong length");
  }
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) throw InternalError("qp: Hessian is not positive definite");

  QpResult result;
  result.x = llt.solve(-g);
  const int mc = static_cast<int>(constraints.size());
  result.multipliers = Vector::Zero(mc);
  if (max_iters <= 0) max_iters = 100 * (mc + n + 1);

  Workspace ws;
  ws.llt = &llt;
  ws.bcols.resize(n, std::max(4, n));

  std::vector<char> in_ws(static_cast<size_t>(mc), 0);
  const auto lower = llt.matrixL();

  // Adds one candidate constraint via primal/dual steps; returns false on
  // detected infeasibility.
  auto process = [&](int p, double sign) -> bool {
    const Vector n_eff = sign * constraints[static_cast<size_t>(p)].normal;
    const double rhs_eff = sign * constraints[static_cast<size_t>(p)].rhs;
    const bool eq = constraints[static_cast<size_t>(p)].kind == ConstraintKind::Equality;
    const Vector v = lower.solve(n_eff);
    const double vnorm2 = v.squaredNorm();
    double u_plus = 0;
    while (true) {
      if (++result.iterations > max_iters) {
        result.status = QpStatus::IterationLimit;
        return false;
      }
      Vector r(ws.k);
      Vector zv = v;
      if (ws.k > 0) {
        Eigen::HouseholderQR<Matrix> qr(ws.bcols.leftCols(ws.k));
        Matrix thinq = qr.householderQ() * Matrix::Identity(n, ws.k);
        const Vector w = thinq.transpose() * v;
        r = qr.matrixQR().topRows(ws.k).triangularView<Eigen::Upper>().solve(w);
        zv -= thinq * w;
      }
      const double ztn = zv.squaredNorm();
      const bool dependent = ztn <= kDependentTol * std::max(vnorm2, 1e-300);

      double t1 = kInf;
      int drop_pos = -1;
      for (int j = 0; j < ws.k; ++j) {
        if (ws.is_eq[static_cast<size_t>(j)]) continue;
        if (r[j] > kDualTol) {
          const double cand = ws.u[static_cast<size_t>(j)] / r[j];
          if (cand < t1) {
            t1 = cand;
            drop_pos = j;
          }
        }
      }
      const double s = n_eff.dot(result.x) - rhs_eff;
      const double t2 = dependent ? kInf : -s / ztn;
      if (dependent && std::abs(s) <= 1e-10 * (1.0 + std::abs(rhs_eff))) {
        // Redundant constraint already implied by the working set.
        return true;
      }
      double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        result.status = QpStatus::Infeasible;
        return false;
      }
      t = std::max(t, 0.0);
      if (t2 >= kInf || (dependent && t1 < kInf)) {
        // Dual step only: adjust multipliers and drop the blocking constraint.
        for (int j = 0; j < ws.k; ++j) ws.u[static_cast<size_t>(j)] -= t * r[j];
        u_plus += t;
        in_ws[static_cast<size_t>(ws.members[static_cast<size_t>(drop_pos)])] = 0;
        ws.drop(drop_pos);
        continue;
      }
      const Vector z = lower.transpose().solve(zv);
      result.x += t * z;
      for (int j = 0; j < ws.k; ++j) ws.u[static_cast<size_t>(j)] -= t * r[j];
      u_plus += t;
      if (t2 <= t1) {
        ws.add(p, sign, u_plus, rhs_eff, eq, v);
        in_ws[static_cast<size_t>(p)] = 1;
        return true;
      }
      in_ws[static_cast<size_t>(ws.members[static_cast<size_t>(drop_pos)])] = 0;
      ws.drop(drop_pos);
    }
  };

  // Equality constraints first, in order.
  for (int p = 0; p < mc; ++p) {
    if (constraints[static_cast<size_t>(p)].kind != ConstraintKind::Equality) continue;
    const double s = constraints[static_cast<size_t>(p)].normal.dot(result.x) - constraints[static_cast<size_t>(p)].rhs;
    const double sign = s > 0 ? -1.0 : 1.0;
    if (!process(p, sign)) return result;
  }

  // Then the most-violated inequality until none are violated.
  while (true) {
    int worst = -1;
    double worst_violation = 0;
    for (int p = 0; p < mc; ++p) {
      if (in_ws[static_cast<size_t>(p)] || constraints[static_cast<size_t>(p)].kind == ConstraintKind::Equality)
        continue;
      const auto& c = constraints[static_cast<size_t>(p)];
      const double s = c.normal.dot(result.x) - c.rhs;
      const double tol = 5e-13 * (1.0 + std::abs(c.rhs) + result.x.lpNorm<Eigen::Infinity>());
      if (s < -tol && -s > worst_violation) {
        worst_violation = -s;
        worst = p;
      }
    }
    if (worst < 0) break;
    if (!process(worst, 1.0)) return result;
  }

  // Re-solve on the final working set to wash out accumulated step roundoff:
  // min 0.5 x'Hx + g'x s.t. N'x = b is, in w = L'x coordinates, the
  // projection of w0 = -L^{-1} g onto { B'w = b } with B = L^{-1} N.
  if (ws.k > 0) {
    const Vector w0 = lower.solve(-g);
    Eigen::HouseholderQR<Matrix> qr(ws.bcols.leftCols(ws.k));
    const Matrix thinq = qr.householderQ() * Matrix::Identity(n, ws.k);
    const auto rfac = qr.matrixQR().topRows(ws.k).triangularView<Eigen::Upper>();
    Vector b(ws.k);
    for (int j = 0; j < ws.k; ++j) b[j] = ws.rhs[static_cast<size_t>(j)];
    const Vector resid = b - ws.bcols.leftCols(ws.k).transpose() * w0;
    const Vector tcoef = rfac.transpose().solve(resid);
    const Vector u_polished = rfac.solve(tcoef);
    const Vector w = w0 + thinq * tcoef;
    result.x = lower.transpose().solve(w);
    for (int j = 0; j < ws.k; ++j) {
      // Keep the dual-feasible dust-free value when polishing would flip sign.
      if (ws.is_eq[static_cast<size_t>(j)] || u_polished[j] >= 0) ws.u[static_cast<size_t>(j)] = u_polished[j];
    }
  }
  result.active.assign(static_cast<size_t>(mc), false);
  for (int j = 0; j < ws.k; ++j) {
    const int idx = ws.members[static_cast<size_t>(j)];
    double u = ws.u[static_cast<size_t>(j)];
    if (!ws.is_eq[static_cast<size_t>(j)]) u = std::max(u, 0.0);
    result.multipliers[idx] = ws.signs[static_cast<size_t>(j)] * u;
    result.active[static_cast<size_t>(idx)] = true;
  }
  result.status = QpStatus::Optimal;
  return result;
}

}  // namespace npasa::qp
