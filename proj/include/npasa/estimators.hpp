#pragma once

#include "npasa/types.hpp"

namespace npasa {

/// KKT error estimator values at one primal-dual triple.
///
/// e0/em0 are defined only on D_0 = { x in Omega, mu >= 0 with pinned
/// entries exactly zero }; outside D_0 they are left empty. The identity
/// e_j^2 = e_{m,j} + e_c holds by construction.
struct EstimatorReport {
  std::optional<double> e0;
  std::optional<double> em0;
  double e1 = 0;
  double em1 = 0;
  double ec = 0;
  double grad_lagrangian_norm_sq = 0;
};

/// grad f(x) + jac_h(x)' lambda + J_r' mu, with J_r the constant stacked
/// residual Jacobian [-A; A; -I; I].
Vector lagrangian_gradient(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu);

/// Componentwise min(a_i, b_i); an infinite a_i yields b_i.
Vector phi_min(const Vector& a, const Vector& b);

/// E_c(x) = ||h(x)||^2.
double e_c(const NlpProblem& p, const Vector& x);

/// E_1 = sqrt(||grad_x L||^2 + ||h||^2 + ||Phi(-r, mu)||^2). Defined for mu
/// of any sign.
double e1(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu);

/// E_0 = sqrt(||grad_x L||^2 + ||h||^2 - mu' r). Throws DomainError when
/// (x, lambda, mu) is outside D_0 (x infeasible beyond feas_tol, any
/// mu_i < 0, or a nonzero multiplier on an infinite-bound row).
double e0(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu, double feas_tol = 1e-10);

/// All estimator values at once; e0/em0 populated only on D_0.
EstimatorReport evaluate_estimators(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu,
                                    double feas_tol = 1e-10);

}  // namespace npasa
