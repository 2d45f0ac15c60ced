#pragma once

#include "npasa/types.hpp"

namespace npasa {

/// Smooth objective with exact gradient. The Hessian callback is optional;
/// engines that want curvature fall back to central differences of the
/// gradient when it is absent.
struct SmoothObjective {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;  // optional
};

enum class SubsolveStatus { Stationary, MaxIters };

struct SubsolveReport {
  Vector minimizer;
  double projected_gradient_norm = 0;
  int iterations = 0;
  SubsolveStatus status = SubsolveStatus::MaxIters;
};

/// Minimizes a smooth objective over a polyhedron by gradient projection
/// with Armijo backtracking plus a projected-Newton refinement on the
/// currently active face. Exits Stationary when
/// || x - P_Omega(x - grad(x)) || <= inner_tol.
SubsolveReport minimize_over_polyhedron(const SmoothObjective& obj, const Polyhedron& poly, Vector x0,
                                        double inner_tol, int max_iters);

struct Em0Solution {
  Vector nu;         // length ell
  Vector eta;        // stacked length m, pinned zeros on infinite rows
  double objective;  // E_{m,0}(z, nu, eta) + gamma ||[nu, eta]||^2
};

/// Global minimizer of the regularized multiplier estimation problem
///   min ||grad f(z) + jac_h(z)' nu + J_r' eta||^2 - eta' r(z)
///       + gamma (||nu||^2 + ||eta||^2)   s.t. eta >= 0,
/// strictly convex for any gamma > 0.
Em0Solution minimize_em0_regularized(const NlpProblem& p, const Vector& z, double gamma);

struct Em1EtaSolution {
  Vector eta;  // stacked length m
  double em1;
};

/// Minimizes eta |-> E_{m,1}(z, nu, eta) over eta >= 0. The objective is
/// piecewise quadratic and nonconvex; projected gradient runs from eta = 0
/// and, when given, from eta_warm, and the better point is refined on its
/// smooth piece. With exact_enumeration and few finite rows the piecewise
/// enumeration oracle result is taken when better.
Em1EtaSolution minimize_em1_over_eta(const NlpProblem& p, const Vector& z, const Vector& nu,
                                     const Vector* eta_warm = nullptr, double inner_tol = 1e-10,
                                     bool exact_enumeration = false);

struct LeastDistanceResult {
  Vector w_bar;
  Vector y;  // slack, y = -h_i - J_i (w_bar - w_i)
};

/// Solves min ||w - w_i||^2 + p ||y||^2 s.t. J_i (w - w_i) + y = -h_i,
/// w in Omega, by eliminating y and running a primal active-set method on
/// the resulting strictly convex QP. The least-squares subproblems are
/// solved in square-root form so large penalties stay well conditioned.
LeastDistanceResult least_distance_linearized(const Polyhedron& poly, const Vector& w_i, const Vector& h_i,
                                              const Matrix& J_i, double p_i);

}  // namespace npasa
