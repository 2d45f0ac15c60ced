#pragma once

#include "npasa/subsolve.hpp"
#include "npasa/types.hpp"

namespace npasa {

/// Augmented Lagrangian L_q(x, nu) = f(x) + nu' h(x) + q ||h(x)||^2.
struct AugmentedLagrangian {
  const NlpProblem* problem = nullptr;
  double q = 1.0;
  Vector nu;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;  // requires second-order callbacks
  SmoothObjective as_objective() const;
};

/// Componentwise clamp of lambda into [-lambda_bar, lambda_bar].
Vector safeguard_lambda(const Vector& lambda, double lambda_bar);

/// One Global Step (phase one): minimize L_q(., safeguarded lambda) over
/// Omega from the incoming x, then first-order multiplier update
/// lambda' = lbar + 2 q h(x') and inequality multipliers mu(x', 1) from the
/// projection duals.
Iterate global_step(const NlpProblem& p, const Iterate& iterate, double q, const SolverConfig& config);

}  // namespace npasa
