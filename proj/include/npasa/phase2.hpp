#pragma once

#include "npasa/subsolve.hpp"
#include "npasa/types.hpp"

namespace npasa {

/// Penalty for the linearized feasibility subproblem,
/// max(beta^2, ||h||^-2). The caller must skip the already-feasible case.
double choose_penalty(double h_norm, double beta);

enum class ConstraintStepOutcome { Success, AlphaFailure, BacktrackFloor, MaxIters };

/// Trace of the constraint step. Entry i of the per-step vectors describes
/// the step from iterates[i] to iterates[i+1]; h_norms is aligned with
/// iterates. alphas holds the theory-scaled 1 - sqrt(p_i) ||y||, alphas_raw
/// the unscaled 1 - ||y||.
struct ConstraintStepTrace {
  std::vector<Vector> iterates;
  std::vector<double> h_norms;
  std::vector<double> penalties;
  std::vector<double> slack_norms;
  std::vector<double> alphas;
  std::vector<double> alphas_raw;
  std::vector<double> step_sizes;
  ConstraintStepOutcome outcome = ConstraintStepOutcome::MaxIters;

  const Vector& w() const { return iterates.back(); }
  int steps() const { return static_cast<int>(penalties.size()); }
};

/// Slack-penalized Gauss-Newton restoration toward h(w) = 0 inside Omega
/// with Armijo safeguard, run until E_c(w) <= theta * E_{m,1}(x, lambda, mu).
/// AlphaFailure and BacktrackFloor leave the caller responsible for falling
/// back to the unchanged input triple.
ConstraintStepTrace constraint_step(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu,
                                    const SolverConfig& config);

enum class MultiplierStepOutcome { Success, DecreaseFailure, MaxIters };

struct MultiplierStepTrace {
  std::vector<Vector> z_iterates;
  std::vector<Vector> nu_iterates;
  std::vector<Vector> eta_iterates;
  std::vector<Vector> eta_prime_iterates;
  std::vector<double> em1_values;  // E_{m,1}(z_i, nu_i, eta_i')
  std::vector<double> penalties;
  MultiplierStepOutcome outcome = MultiplierStepOutcome::MaxIters;

  const Vector& z() const { return z_iterates.back(); }
  const Vector& nu() const { return nu_iterates.back(); }
  const Vector& eta_prime() const { return eta_prime_iterates.back(); }
  int steps() const { return static_cast<int>(em1_values.size()) - 1; }
};

/// Multiplier step: regularized E_{m,0} fit, E_{m,1} refinement in eta, and
/// linearized penalized-Lagrangian descent, looped until
/// E_{m,1}(z, nu, eta') <= theta_target with a delta-decrease safeguard.
MultiplierStepTrace multiplier_step(const NlpProblem& p, const Vector& w, double theta_target,
                                    const SolverConfig& config);

struct LocalStepResult {
  Iterate result;  // accepted output, or a copy of the input on failure
  bool failed = false;
  ConstraintStepTrace constraint_trace;
  std::optional<MultiplierStepTrace> multiplier_trace;
};

/// One Local Step (phase two): constraint step then multiplier step. Any
/// internal failure returns the input triple unchanged.
LocalStepResult local_step(const NlpProblem& p, const Iterate& iterate, const SolverConfig& config);

}  // namespace npasa
