#pragma once

#include "npasa/types.hpp"

namespace npasa::oracle {

/// min 0.5 x' H x + g' x over a Polyhedron, H symmetric PSD.
struct DenseQp {
  Matrix H;
  Vector g;
  Polyhedron poly;
};

struct BruteForceQpResult {
  Vector x;
  Vector mu_stacked;
  double objective = 0;
};

/// Reference QP solver: enumerates working subsets of the polyhedron's
/// constraints, solves each equality-constrained KKT system by dense
/// factorization, and keeps the best candidate passing the feasibility and
/// dual-sign filters. Independent of the production active-set engines.
/// Throws std::invalid_argument beyond the enumeration bounds (n <= 10,
/// stacked constraints <= 24) and InfeasibleError when no subset yields a
/// feasible point.
BruteForceQpResult brute_force_qp(const DenseQp& qp);

/// Reference minimizer of eta |-> E_{m,1}(z, nu, eta) over eta >= 0 by
/// enumerating the smooth pieces of the componentwise-min term (each finite
/// stacked row is fixed at 0, fixed at the kink, free inside the quadratic
/// piece, or free beyond it). Throws std::invalid_argument when more than
/// max_rows finite rows are present.
Vector enumerate_em1_eta(const NlpProblem& p, const Vector& z, const Vector& nu, int max_rows = 12);

/// Central finite differences.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h_step);
Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x, double h_step);

}  // namespace npasa::oracle
