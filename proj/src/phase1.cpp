#include "npasa/phase1.hpp"

#include "npasa/projection.hpp"

#include <cmath>

namespace npasa {

double AugmentedLagrangian::value(const Vector& x) const {
  double v = problem->eval_f(x);
  if (problem->ell > 0) {
    const Vector hv = problem->eval_h(x);
    v += nu.dot(hv) + q * hv.squaredNorm();
  }
  return v;
}

Vector AugmentedLagrangian::gradient(const Vector& x) const {
  Vector g = problem->eval_grad_f(x);
  if (problem->ell > 0) {
    const Vector hv = problem->eval_h(x);
    g += problem->eval_jac_h(x).transpose() * (nu + 2.0 * q * hv);
  }
  return g;
}

Matrix AugmentedLagrangian::hessian(const Vector& x) const {
  Matrix H = problem->hess_f(x);
  if (problem->ell > 0) {
    const Vector hv = problem->eval_h(x);
    const Matrix Jh = problem->eval_jac_h(x);
    H += problem->hess_h_weighted(x, nu + 2.0 * q * hv);
    H += 2.0 * q * Jh.transpose() * Jh;
  }
  return H;
}

SmoothObjective AugmentedLagrangian::as_objective() const {
  SmoothObjective obj;
  obj.value = [*this](const Vector& x) { return value(x); };
  obj.gradient = [*this](const Vector& x) { return gradient(x); };
  if (problem->has_second_order()) {
    obj.hessian = [*this](const Vector& x) { return hessian(x); };
  }
  return obj;
}

Vector safeguard_lambda(const Vector& lambda, double lambda_bar) {
  if (lambda_bar <= 0) throw std::invalid_argument("safeguard_lambda: lambda_bar must be positive");
  return lambda.cwiseMax(-lambda_bar).cwiseMin(lambda_bar);
}

Iterate global_step(const NlpProblem& p, const Iterate& iterate, double q, const SolverConfig& config) {
  if (q < 1.0) throw std::invalid_argument("global_step: q must be >= 1");
  AugmentedLagrangian lq;
  lq.problem = &p;
  lq.q = q;
  lq.nu = safeguard_lambda(iterate.lambda, config.lambda_bar);

  const SubsolveReport rep = minimize_over_polyhedron(lq.as_objective(), p.omega, iterate.x, config.inner_tol, 2000);
  Iterate out;
  out.x = rep.minimizer;
  out.lambda = p.ell > 0 ? Vector(lq.nu + 2.0 * q * p.eval_h(out.x)) : Vector(0);
  out.mu = mu_of_x(p, out.x, lq.nu, q);
  return out;
}

}  // namespace npasa
