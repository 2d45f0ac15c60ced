#pragma once

#include "npasa/types.hpp"

namespace npasa {

/// Serializable problem family: quadratic objective plus quadratic equality
/// constraints over a polyhedron,
///   f(x) = 0.5 x'Qx + c'x,   h_j(x) = 0.5 x'P_j x + a_j'x + b_j.
/// Gradients and Hessians are exact: grad f = Qx + c, grad h_j = P_j x + a_j.
struct QuadraticConstraint {
  Matrix P;
  Vector a;
  double b = 0;
};

struct QuadraticNlpSpec {
  std::string name;
  int n = 0;
  int ell = 0;
  Matrix Q;
  Vector c;
  std::vector<QuadraticConstraint> constraints;
  Polyhedron poly;

  /// Checks symmetry of Q and each P_j (within 1e-12) and polyhedron
  /// invariants; throws on violation.
  void validate() const;

  NlpProblem to_problem() const;
};

/// Parses the problem-file text format; errors carry the offending line.
QuadraticNlpSpec parse_quadratic_spec(const std::string& text);

/// Serializes with shortest round-trip decimals, so finite values survive a
/// parse/serialize cycle bit-exactly.
std::string serialize_quadratic_spec(const QuadraticNlpSpec& spec);

QuadraticNlpSpec load_spec_file(const std::string& path);
void save_spec_file(const QuadraticNlpSpec& spec, const std::string& path);

/// Parses a problem file and returns the evaluator form.
NlpProblem load_problem(const std::string& text);

}  // namespace npasa
