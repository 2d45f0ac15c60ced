#include "npasa/projection.hpp"

#include "npasa/qp.hpp"

#include <cmath>

namespace npasa {

namespace {

double complementarity_residual(const Vector& mu, const Vector& r) {
  double worst = 0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu[i] != 0.0) worst = std::max(worst, std::abs(mu[i] * r[i]));
  }
  return worst;
}

}  // namespace

ProjectionResult recover_multipliers(const Polyhedron& poly, const Vector& c, const Vector& pi_star,
                                     const Vector& y_star) {
  const int nr = poly.rows();
  const int nv = poly.n();
  if (c.size() != nv || y_star.size() != nv) throw DimensionError("recover_multipliers: point has wrong length");
  if (pi_star.size() != nr) throw DimensionError("recover_multipliers: pi has wrong length");

  ProjectionResult res;
  res.y_star = y_star;
  res.pi_star = pi_star;
  res.gamma1 = pi_star.cwiseMax(0.0);
  res.gamma2 = (-pi_star).cwiseMax(0.0);
  res.upsilon1 = Vector::Zero(nv);
  res.upsilon2 = Vector::Zero(nv);

  const Vector yhat = nr > 0 ? Vector(c + poly.A.transpose() * pi_star) : c;
  const double act_tol = 1e-9;
  for (int i = 0; i < nv; ++i) {
    const bool at_lo = std::isfinite(poly.box_lo[i]) && std::abs(y_star[i] - poly.box_lo[i]) <= act_tol;
    const bool at_hi = std::isfinite(poly.box_hi[i]) && std::abs(y_star[i] - poly.box_hi[i]) <= act_tol;
    if (!at_lo && !at_hi) continue;
    const double v_lo = poly.box_lo[i] - yhat[i];
    const double v_hi = yhat[i] - poly.box_hi[i];
    if (at_lo && v_lo > 0) {
      res.upsilon1[i] = v_lo;
    } else if (at_hi && v_hi > 0) {
      res.upsilon2[i] = v_hi;
    } else if ((at_lo && !at_hi && v_lo < -1e-9) || (at_hi && !at_lo && v_hi < -1e-9)) {
      // y claims the bound is active but yhat lies strictly inside it.
      throw InternalError("recover_multipliers: negative reconstructed upsilon");
    }
    // Exact ties (yhat on the bound) stay in S_3 with zero upsilon.
  }

  res.mu_stacked.resize(poly.stacked_size());
  res.mu_stacked << res.gamma1, res.gamma2, res.upsilon1, res.upsilon2;

  // KKT residual over stationarity, feasibility, sign, and complementarity.
  const Vector grad = y_star - c + poly.stacked_jacobian_transpose(res.mu_stacked);
  double residual = grad.lpNorm<Eigen::Infinity>();
  const Vector r = poly.stacked_residual(y_star);
  for (int i = 0; i < r.size(); ++i) {
    if (r[i] > 0) residual = std::max(residual, r[i]);
  }
  residual = std::max(residual, std::max(0.0, -res.mu_stacked.minCoeff()));
  residual = std::max(residual, complementarity_residual(res.mu_stacked, r));
  res.kkt_residual = residual;
  return res;
}

ProjectionResult project(const Polyhedron& poly, const Vector& c) {
  poly.validate();
  if (c.size() != poly.n()) throw DimensionError("project: point has wrong length");
  if (!c.allFinite()) throw std::invalid_argument("project: point must be finite");
  const int nr = poly.rows();
  const int nv = poly.n();

  if (nr == 0) {
    // Pure box: clamp.
    const Vector y = c.cwiseMax(poly.box_lo).cwiseMin(poly.box_hi);
    return recover_multipliers(poly, c, Vector(0), y);
  }

  const qp::PolyhedronConstraints pc = qp::polyhedron_constraints(poly);
  const Matrix H = Matrix::Identity(nv, nv);
  const qp::QpResult sol = qp::solve_strictly_convex_qp(H, -c, pc.constraints);
  if (sol.status == qp::QpStatus::Infeasible) {
    throw InfeasibleError("project: polyhedron is empty");
  }
  if (sol.status != qp::QpStatus::Optimal) {
    throw SubsolverFailure("project: active-set solver hit its iteration limit");
  }
  const Vector mu = qp::scatter_multipliers(poly, pc, sol.multipliers);
  const Vector pi = mu.segment(0, nr) - mu.segment(nr, nr);
  return recover_multipliers(poly, c, pi, sol.x);
}

Vector mu_of_x(const NlpProblem& p, const Vector& x, const Vector& nu, double q) {
  if (q < 0) throw std::invalid_argument("mu_of_x: q must be nonnegative");
  Vector grad_lq = p.eval_grad_f(x);
  if (p.ell > 0) {
    const Vector hv = p.eval_h(x);
    grad_lq += p.eval_jac_h(x).transpose() * (nu + 2.0 * q * hv);
  }
  const Vector c = x - grad_lq;
  return project(p.omega, c).mu_stacked;
}

}  // namespace npasa
