#pragma once

#include "npasa/types.hpp"

namespace npasa::qp {

enum class ConstraintKind { Equality, Inequality };

/// normal' x >= rhs (Inequality) or normal' x == rhs (Equality).
struct LinearConstraint {
  Vector normal;
  double rhs = 0;
  ConstraintKind kind = ConstraintKind::Inequality;
};

enum class QpStatus { Optimal, Infeasible, IterationLimit };

struct QpResult {
  Vector x;
  Vector multipliers;  // one per constraint; >= 0 on inequalities, free on equalities
  std::vector<bool> active;  // in the final working set
  QpStatus status = QpStatus::IterationLimit;
  int iterations = 0;
};

/// Minimizes 0.5 x' H x + g' x subject to the given constraints, H symmetric
/// positive definite. Dual active-set method: starts from the unconstrained
/// minimizer and adds violated constraints one at a time, so no feasible
/// starting point is needed and an empty feasible set is detected cleanly.
QpResult solve_strictly_convex_qp(const Matrix& H, const Vector& g, const std::vector<LinearConstraint>& constraints,
                                  int max_iters = 0);

/// Where a constraint's multiplier lands in the stacked mu = [g1; g2; u1; u2]
/// ordering, with `sign` mapping the solver's multiplier onto the slot.
struct StackedSlot {
  int index = -1;
  double sign = 1.0;
};

/// Canonical constraint list for a polyhedron: equality rows appear once,
/// finite one-sided bounds once per side, infinite bounds not at all.
/// slots[i] gives the stacked row fed by constraint i's multiplier; for
/// equality rows (row or box) the multiplier is split by sign between the
/// lower and upper stacked slots, and slots[i] holds the lower slot.
struct PolyhedronConstraints {
  std::vector<LinearConstraint> constraints;
  std::vector<StackedSlot> slots;
  std::vector<bool> equality_pair;  // true when the slot's mirror slot takes the opposite sign
};

PolyhedronConstraints polyhedron_constraints(const Polyhedron& poly);

/// Scatters per-constraint multipliers into the stacked mu vector, splitting
/// equality-row multipliers by sign.
Vector scatter_multipliers(const Polyhedron& poly, const PolyhedronConstraints& pc, const Vector& multipliers);

}  // namespace npasa::qp
