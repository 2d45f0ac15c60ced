#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace npasa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Contract violations (bad shapes, bad arguments) and data errors are thrown;
// algorithmic outcomes (iteration caps, step rejections) are reported through
// status fields on the result structs.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SubsolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Polyhedron in general two-sided form
///   Omega = { x : row_lo <= A x <= row_hi, box_lo <= x <= box_hi }.
///
/// All constraint-facing code consumes the stacked one-sided view
///   r(x) = [row_lo - A x; A x - row_hi; box_lo - x; x - box_hi] <= 0,
/// whose rows are ordered exactly as the multiplier vector mu. Infinite
/// bounds produce stacked rows that are never violated (residual -inf);
/// their multipliers are pinned to zero everywhere.
struct Polyhedron {
  Matrix A;       // m_rows x n
  Vector row_lo;  // m_rows, entries may be -inf
  Vector row_hi;  // m_rows, entries may be +inf
  Vector box_lo;  // n, entries may be -inf
  Vector box_hi;  // n, entries may be +inf

  Polyhedron() = default;
  Polyhedron(Matrix A_, Vector row_lo_, Vector row_hi_, Vector box_lo_, Vector box_hi_);

  /// Box-only polyhedron (no rows).
  static Polyhedron box(Vector lo, Vector hi);
  /// All of R^n.
  static Polyhedron free_space(int n);

  int n() const { return static_cast<int>(box_lo.size()); }
  int rows() const { return static_cast<int>(A.rows()); }
  /// Length of the stacked residual, m = 2*m_rows + 2*n.
  int stacked_size() const { return 2 * rows() + 2 * n(); }

  void validate() const;

  /// r(x) as above; entries from infinite bounds are -inf.
  Vector stacked_residual(const Vector& x) const;

  /// max_i r_i(x) <= tol, treating -inf entries as satisfied.
  bool is_feasible(const Vector& x, double tol) const;

  /// J_r^T mu with J_r = [-A; A; -I; I] and mu stacked as [g1; g2; u1; u2].
  Vector stacked_jacobian_transpose(const Vector& mu) const;

  /// mu' r skipping entries with mu_i == 0, so pinned multipliers on
  /// infinite rows contribute 0 rather than NaN.
  static double stacked_dot(const Vector& mu, const Vector& r);

  /// True for stacked rows backed by a finite bound.
  std::vector<bool> finite_rows() const;

  /// Appends equality rows (extra_A z = extra_rhs) to the row block.
  Polyhedron with_equality_rows(const Matrix& extra_A, const Vector& extra_rhs) const;
};

/// Nonlinear program
///   min f(x)  s.t.  h(x) = 0,  x in Omega,
/// with evaluator-provided derivatives. Second-order callbacks are optional;
/// engines fall back to finite differences of the gradient when absent.
/// hess_h_weighted(x, w) must return sum_j w_j * hess(h_j)(x).
struct NlpProblem {
  int n = 0;
  int ell = 0;
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> grad_f;
  std::function<Vector(const Vector&)> h;
  std::function<Matrix(const Vector&)> jac_h;
  std::function<Matrix(const Vector&)> hess_f;                          // optional
  std::function<Matrix(const Vector&, const Vector&)> hess_h_weighted;  // optional
  Polyhedron omega;

  double eval_f(const Vector& x) const;
  Vector eval_grad_f(const Vector& x) const;
  Vector eval_h(const Vector& x) const;
  Matrix eval_jac_h(const Vector& x) const;
  bool has_second_order() const { return static_cast<bool>(hess_f) && static_cast<bool>(hess_h_weighted); }
};

/// Primal-dual triple (x, lambda, mu) with mu over the stacked inequalities.
struct Iterate {
  Vector x;
  Vector lambda;
  Vector mu;
};

struct SolverConfig {
  double eps = 1e-8;         // termination tolerance on E_{m,1}
  double theta = 0.75;       // phase branching ratio, in (0,1)
  double phi = 10.0;         // penalty growth factor, > 1
  double lambda_bar = 1e6;   // multiplier safeguard box half-width
  double q0 = 1.0;           // initial augmented-Lagrangian penalty, >= 1
  double alpha = 0.25;       // constraint-step slack threshold, in (0,1]
  double beta = 1.0;         // constraint-step penalty floor, >= 1
  double sigma = 0.5;        // Armijo backtracking factor, in (0,1)
  double tau = 0.1;          // Armijo decrease parameter, in (0,1)
  double p_init = 1e2;       // multiplier-step penalty, >> 1
  double delta = 0.9;        // multiplier-step decrease factor, in (0,1)
  double gamma = 1e-12;      // multiplier estimation regularizer, > 0
  double inner_tol = 1e-10;  // inner stationarity tolerance
  int max_outer = 100;
  int max_constraint_iters = 40;
  int max_multiplier_iters = 40;
  int max_backtracks = 60;
  double s_min = 1e-10;  // line-search floor, in (0,1)
  bool em1_exact_enumeration = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class SolveStatus { Converged, MaxOuterIterations };

/// One record per outer-loop pass of the driver (GS call or LS attempt).
struct LogRecord {
  int k = 0;      // outer iteration counter (unchanged on rejected LS passes)
  int phase = 1;  // 1 or 2
  double q = 0;   // current augmented-Lagrangian penalty
  double e = 0;   // best E_1 seen so far (nonincreasing)
  std::optional<double> e0;
  double e1 = 0;
  double em1 = 0;
  double ec = 0;
  std::optional<double> em1_mu1;  // phase-one guard value E_{m,1}(x_k, lambda_k, mu(x_k,1))
  int constraint_iters = 0;
  int multiplier_iters = 0;
  bool accepted = true;
  bool alpha_failure = false;
  bool backtrack_floor = false;
  bool decrease_failure = false;
  bool rejected = false;  // phase-two E_1 contraction test failed
  double wall_time_sec = 0;
};

struct EvalCounters {
  long f_evals = 0;
  long grad_evals = 0;
  long h_evals = 0;
  long jac_evals = 0;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::MaxOuterIterations;
  Iterate final_iterate;
  double final_e1 = 0;
  double final_em1 = 0;
  std::optional<double> final_e0;
  std::vector<LogRecord> log;
  int phase1_steps = 0;
  int phase2_steps = 0;
  bool projected_start = false;
  EvalCounters counters;
};

}  // namespace npasa
