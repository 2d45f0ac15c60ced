#pragma once

#include "npasa/types.hpp"

namespace npasa {

/// Euclidean projection onto a Polyhedron plus the dual bookkeeping needed to
/// reconstruct stacked inequality multipliers.
///
/// Sign conventions: on components strictly inside the box the projected
/// point satisfies y = c + A' pi, and pi_j > 0 forces row j to its lower
/// bound while pi_j < 0 forces it to its upper bound. The stacked multiplier
/// is mu = [gamma1; gamma2; upsilon1; upsilon2].
struct ProjectionResult {
  Vector y_star;
  Vector pi_star;   // length m_rows
  Vector gamma1;    // max(pi, 0)
  Vector gamma2;    // max(-pi, 0)
  Vector upsilon1;  // box lower multipliers
  Vector upsilon2;  // box upper multipliers
  Vector mu_stacked;
  double kkt_residual = 0;
};

/// Projects c onto the polyhedron. Throws InfeasibleError when the
/// polyhedron is empty and SubsolverFailure when the inner active-set solver
/// fails to converge.
ProjectionResult project(const Polyhedron& poly, const Vector& c);

/// Rebuilds (gamma1, gamma2, upsilon1, upsilon2, mu_stacked) from row duals,
/// assuming (y_star, pi_star) satisfy the projection optimality conditions.
/// A reconstructed upsilon below -1e-9 signals an inconsistent dual and
/// throws InternalError.
ProjectionResult recover_multipliers(const Polyhedron& poly, const Vector& c, const Vector& pi_star,
                                     const Vector& y_star);

/// Stacked multiplier mu(x, 1) from projecting x - grad_x L_q(x, nu) onto
/// Omega, where L_q is the augmented Lagrangian with penalty q.
Vector mu_of_x(const NlpProblem& p, const Vector& x, const Vector& nu, double q);

}  // namespace npasa
