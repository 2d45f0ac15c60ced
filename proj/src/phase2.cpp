#include "npasa/phase2.hpp"

#include "npasa/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace npasa {

double choose_penalty(double h_norm, double beta) {
  if (beta < 1.0) throw std::invalid_argument("choose_penalty: beta must be >= 1");
  if (!(h_norm > 0)) throw std::invalid_argument("choose_penalty: h_norm must be positive");
  return std::max(beta * beta, 1.0 / (h_norm * h_norm));
}

ConstraintStepTrace constraint_step(const NlpProblem& p, const Vector& x, const Vector& lambda, const Vector& mu,
                                    const SolverConfig& config) {
  config.validate();
  const double em1_input = evaluate_estimators(p, x, lambda, mu, config.inner_tol).em1;
  // Floored at the termination scale: driving feasibility below eps buys
  // nothing and the input estimator can carry self-consistency artifacts.
  const double threshold = std::max({config.theta * em1_input, 0.5 * config.eps, 1e-30});

  ConstraintStepTrace trace;
  Vector w = x;
  Vector hv = p.eval_h(w);
  trace.iterates.push_back(w);
  trace.h_norms.push_back(hv.norm());

  for (int i = 0; i < config.max_constraint_iters; ++i) {
    const double h_norm = hv.norm();
    if (h_norm * h_norm <= threshold) {
      trace.outcome = ConstraintStepOutcome::Success;
      return trace;
    }
    const double p_i = choose_penalty(h_norm, config.beta);
    const LeastDistanceResult ld = least_distance_linearized(p.omega, w, hv, p.eval_jac_h(w), p_i);
    const double y_norm = ld.y.norm();
    const double alpha_scaled = 1.0 - std::sqrt(p_i) * y_norm;
    const double alpha_raw = 1.0 - y_norm;
    if (alpha_scaled < config.alpha) {
      trace.penalties.push_back(p_i);
      trace.slack_norms.push_back(y_norm);
      trace.alphas.push_back(alpha_scaled);
      trace.alphas_raw.push_back(alpha_raw);
      trace.step_sizes.push_back(0.0);
      trace.outcome = ConstraintStepOutcome::AlphaFailure;
      return trace;
    }

    double s = 1.0;
    bool accepted = false;
    Vector w_trial;
    Vector h_trial;
    for (int bt = 0; bt < config.max_backtracks && s >= config.s_min; ++bt) {
      w_trial = w + s * (ld.w_bar - w);
      h_trial = p.eval_h(w_trial);
      if (h_trial.norm() <= (1.0 - config.tau * alpha_scaled * s) * h_norm) {
        accepted = true;
        break;
      }
      s *= config.sigma;
    }
    trace.penalties.push_back(p_i);
    trace.slack_norms.push_back(y_norm);
    trace.alphas.push_back(alpha_scaled);
    trace.alphas_raw.push_back(alpha_raw);
    trace.step_sizes.push_back(accepted ? s : 0.0);
    if (!accepted) {
      trace.outcome = ConstraintStepOutcome::BacktrackFloor;
      return trace;
    }
    w = w_trial;
    hv = h_trial;
    trace.iterates.push_back(w);
    trace.h_norms.push_back(hv.norm());
  }
  if (hv.squaredNorm() <= threshold) {
    trace.outcome = ConstraintStepOutcome::Success;
  } else {
    trace.outcome = ConstraintStepOutcome::MaxIters;
  }
  return trace;
}

namespace {

// L_p^i(z, nu) = f(z) + nu' h(z) + p ||h(z) - h_anchor||^2.
SmoothObjective penalized_lagrangian(const NlpProblem& p, double pen, Vector nu, Vector h_anchor) {
  SmoothObjective obj;
  obj.value = [&p, pen, nu, h_anchor](const Vector& z) {
    double v = p.eval_f(z);
    if (p.ell > 0) {
      const Vector hv = p.eval_h(z);
      v += nu.dot(hv) + pen * (hv - h_anchor).squaredNorm();
    }
    return v;
  };
  obj.gradient = [&p, pen, nu, h_anchor](const Vector& z) {
    Vector g = p.eval_grad_f(z);
    if (p.ell > 0) {
      const Vector hv = p.eval_h(z);
      g += p.eval_jac_h(z).transpose() * (nu + 2.0 * pen * (hv - h_anchor));
    }
    return g;
  };
  if (p.has_second_order()) {
    obj.hessian = [&p, pen, nu, h_anchor](const Vector& z) {
      Matrix H = p.hess_f(z);
      if (p.ell > 0) {
        const Vector hv = p.eval_h(z);
        const Matrix Jh = p.eval_jac_h(z);
        H += p.hess_h_weighted(z, nu + 2.0 * pen * (hv - h_anchor));
        H += 2.0 * pen * Jh.transpose() * Jh;
      }
      return H;
    };
  }
  return obj;
}

struct MultiplierEstimate {
  Vector nu;
  Vector eta;
  Vector eta_prime;
  double em1;
};

MultiplierEstimate estimate_multipliers(const NlpProblem& p, const Vector& z, const SolverConfig& config) {
  MultiplierEstimate est;
  const Em0Solution ms1 = minimize_em0_regularized(p, z, config.gamma);
  est.nu = ms1.nu;
  est.eta = ms1.eta;
  const Em1EtaSolution ms2 =
      minimize_em1_over_eta(p, z, ms1.nu, &ms1.eta, config.inner_tol, config.em1_exact_enumeration);
  est.eta_prime = ms2.eta;
  est.em1 = ms2.em1;
  return est;
}

}  // namespace

MultiplierStepTrace multiplier_step(const NlpProblem& p, const Vector& w, double theta_target,
                                    const SolverConfig& config) {
  config.validate();
  MultiplierStepTrace trace;
  Vector z = w;
  MultiplierEstimate est = estimate_multipliers(p, z, config);
  trace.z_iterates.push_back(z);
  trace.nu_iterates.push_back(est.nu);
  trace.eta_iterates.push_back(est.eta);
  trace.eta_prime_iterates.push_back(est.eta_prime);
  trace.em1_values.push_back(est.em1);

  double pen = config.p_init;
  for (int i = 0; i < config.max_multiplier_iters; ++i) {
    if (est.em1 <= theta_target) {
      trace.outcome = MultiplierStepOutcome::Success;
      return trace;
    }
    const double ec_z = p.eval_h(z).squaredNorm();
    const double e1_sq = est.em1 + ec_z;
    const double tol_inner = std::max(std::min(config.inner_tol, 0.01 * e1_sq), 1e-30);

    bool accepted = false;
    Vector z_next;
    MultiplierEstimate est_next;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const Matrix Jh = p.eval_jac_h(z);
      const Polyhedron manifold = p.omega.with_equality_rows(Jh, Jh * z);
      const SmoothObjective obj = penalized_lagrangian(p, pen, est.nu, p.eval_h(z));
      const SubsolveReport rep = minimize_over_polyhedron(obj, manifold, z, tol_inner, 2000);
      z_next = rep.minimizer;
      est_next = estimate_multipliers(p, z_next, config);
      if (est_next.em1 <= config.delta * est.em1) {
        accepted = true;
        break;
      }
      pen *= 10.0;  // one retry with a stiffer penalty before giving up
    }
    trace.penalties.push_back(pen);
    if (!accepted) {
      trace.outcome = MultiplierStepOutcome::DecreaseFailure;
      return trace;
    }
    z = z_next;
    est = est_next;
    trace.z_iterates.push_back(z);
    trace.nu_iterates.push_back(est.nu);
    trace.eta_iterates.push_back(est.eta);
    trace.eta_prime_iterates.push_back(est.eta_prime);
    trace.em1_values.push_back(est.em1);
  }
  if (est.em1 <= theta_target) {
    trace.outcome = MultiplierStepOutcome::Success;
  } else {
    trace.outcome = MultiplierStepOutcome::MaxIters;
  }
  return trace;
}

LocalStepResult local_step(const NlpProblem& p, const Iterate& iterate, const SolverConfig& config) {
  LocalStepResult out;
  out.result = iterate;
  try {
    out.constraint_trace = constraint_step(p, iterate.x, iterate.lambda, iterate.mu, config);
  } catch (const SubsolverFailure&) {
    out.failed = true;
    return out;
  }
  // Alpha and backtracking failures hand the input back unchanged; an
  // iteration cap just means partial restoration progress, which the
  // multiplier step and the driver's acceptance test still gate.
  if (out.constraint_trace.outcome == ConstraintStepOutcome::AlphaFailure ||
      out.constraint_trace.outcome == ConstraintStepOutcome::BacktrackFloor) {
    out.failed = true;
    return out;
  }
  const Vector& w = out.constraint_trace.w();
  const double ec_w = p.eval_h(w).squaredNorm();
  const double theta_target = std::max({config.theta * ec_w, 0.5 * config.eps, 1e-30});
  try {
    out.multiplier_trace = multiplier_step(p, w, theta_target, config);
  } catch (const SubsolverFailure&) {
    out.failed = true;
    return out;
  }
  if (out.multiplier_trace->outcome == MultiplierStepOutcome::DecreaseFailure) {
    out.failed = true;
    return out;
  }
  out.result.x = out.multiplier_trace->z();
  out.result.lambda = out.multiplier_trace->nu();
  out.result.mu = out.multiplier_trace->eta_prime();
  return out;
}

}  // namespace npasa
