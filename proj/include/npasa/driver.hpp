#pragma once

#include "npasa/quadratic.hpp"
#include "npasa/types.hpp"

namespace npasa {

/// NPASA outer loop: alternates the augmented-Lagrangian global phase and
/// the active-set local phase with estimator-ratio branching, growing the
/// penalty on each phase-one entry. Terminates when E_{m,1} <= eps, either
/// through the phase-one guard (with the projection-reconstructed
/// mu(x_k, 1)) or the phase-two guard (with the stored multipliers).
SolveOutcome npasa_solve(const NlpProblem& p, const Vector& x0, const Vector& lambda0, const Vector& mu0,
                         const SolverConfig& config);

struct RateFit {
  double order = 0;     // least-squares slope of log err_{k+1} vs log err_k
  double constant = 0;  // fitted c in err_{k+1} ~ c * err_k^order
  int pairs = 0;
};

/// Fits the empirical convergence order over the trailing `window` entries
/// (window >= 3, all positive). Throws std::invalid_argument on
/// insufficient data.
RateFit fit_convergence_order(const std::vector<double>& errors, int window);

/// Built-in analytically solvable test problems with their KKT data.
struct CorpusProblem {
  std::string name;
  NlpProblem problem;
  std::optional<QuadraticNlpSpec> quadratic;  // absent for evaluator-only problems
  Vector x_star;
  Vector lambda_star;
  Vector mu_star;                  // stacked
  std::vector<Vector> alt_x_star;  // additional symmetric minimizers
  Vector default_x0;               // documented cold start
  Vector default_lambda0;
};

const std::vector<CorpusProblem>& corpus();
const CorpusProblem& corpus_problem(const std::string& name);

/// Iterate log serialization: one JSON object per line, doubles as shortest
/// round-trip decimals.
std::string log_record_to_json(const LogRecord& rec);
LogRecord log_record_from_json(const std::string& line);
void write_log_file(const std::string& path, const std::vector<LogRecord>& log);
std::vector<LogRecord> read_log_file(const std::string& path);

}  // namespace npasa
