#include "npasa/estimators.hpp"

#include <cmath>

namespace npasa {

Vector lagrangian_gradient(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu) {
  if (lambda.size() != p.ell) throw DimensionError("lagrangian_gradient: lambda has wrong length");
  Vector g = p.eval_grad_f(x);
  if (p.ell > 0) g += p.eval_jac_h(x).transpose() * lambda;
  g += p.omega.stacked_jacobian_transpose(mu);
  return g;
}

Vector phi_min(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("phi_min: length mismatch");
  return a.cwiseMin(b);
}

double e_c(const NlpProblem& p, const Vector& x) { return p.eval_h(x).squaredNorm(); }

namespace {

struct D0Check {
  bool member = false;
  double mu_dot_r = 0;
};

D0Check check_d0(const Polyhedron& omega, const Vector& x, const Vector& mu, const Vector& r, double feas_tol) {
  D0Check out;
  const auto finite = omega.finite_rows();
  for (int i = 0; i < mu.size(); ++i) {
    if (mu[i] < 0) return out;
    if (!finite[static_cast<size_t>(i)] && mu[i] != 0.0) return out;
  }
  if (!omega.is_feasible(x, feas_tol)) return out;
  out.member = true;
  out.mu_dot_r = Polyhedron::stacked_dot(mu, r);
  return out;
}

}  // namespace

EstimatorReport evaluate_estimators(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu,
                                    double feas_tol) {
  if (mu.size() != p.omega.stacked_size()) throw DimensionError("evaluate_estimators: mu has wrong length");
  EstimatorReport rep;
  const Vector gL = lagrangian_gradient(p, x, lambda, mu);
  rep.grad_lagrangian_norm_sq = gL.squaredNorm();
  rep.ec = e_c(p, x);
  const Vector r = p.omega.stacked_residual(x);
  const Vector phi = phi_min(-r, mu);
  rep.em1 = rep.grad_lagrangian_norm_sq + phi.squaredNorm();
  rep.e1 = std::sqrt(rep.em1 + rep.ec);
  const D0Check d0 = check_d0(p.omega, x, mu, r, feas_tol);
  if (d0.member) {
    rep.em0 = rep.grad_lagrangian_norm_sq - d0.mu_dot_r;
    rep.e0 = std::sqrt(std::max(0.0, *rep.em0 + rep.ec));
  }
  return rep;
}

double e1(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu) {
  return evaluate_estimators(p, x, lambda, mu).e1;
}

double e0(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu, double feas_tol) {
  const EstimatorReport rep = evaluate_estimators(p, x, lambda, mu, feas_tol);
  if (!rep.e0) {
    throw DomainError("e0: (x, lambda, mu) is outside D_0 (x infeasible or mu invalid)");
  }
  return *rep.e0;
}

}  // namespace npasa
