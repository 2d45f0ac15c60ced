#include "npasa/driver.hpp"

#include "npasa/estimators.hpp"
#include "npasa/phase1.hpp"
#include "npasa/phase2.hpp"
#include "npasa/projection.hpp"

#include <chrono>
#include <cmath>
#include <memory>

namespace npasa {

namespace {

NlpProblem with_counters(const NlpProblem& p, const std::shared_ptr<EvalCounters>& counters) {
  NlpProblem out = p;
  out.f = [f = p.f, counters](const Vector& x) {
    ++counters->f_evals;
    return f(x);
  };
  out.grad_f = [g = p.grad_f, counters](const Vector& x) {
    ++counters->grad_evals;
    return g(x);
  };
  if (p.h) {
    out.h = [h = p.h, counters](const Vector& x) {
      ++counters->h_evals;
      return h(x);
    };
  }
  if (p.jac_h) {
    out.jac_h = [j = p.jac_h, counters](const Vector& x) {
      ++counters->jac_evals;
      return j(x);
    };
  }
  return out;
}

}  // namespace

SolveOutcome npasa_solve(const NlpProblem& p0, const Vector& x0_in, const Vector& lambda0, const Vector& mu0,
                         const SolverConfig& config) {
  config.validate();
  if (x0_in.size() != p0.n) throw DimensionError("npasa_solve: x0 has wrong length");
  if (lambda0.size() != p0.ell) throw DimensionError("npasa_solve: lambda0 has wrong length");
  if (mu0.size() != p0.omega.stacked_size()) throw DimensionError("npasa_solve: mu0 has wrong length");
  if (mu0.minCoeff() < 0) throw std::invalid_argument("npasa_solve: mu0 must be nonnegative");

  auto counters = std::make_shared<EvalCounters>();
  const NlpProblem p = with_counters(p0, counters);

  SolveOutcome outcome;
  Iterate cur{x0_in, lambda0, mu0};
  if (!p.omega.is_feasible(cur.x, 1e-9)) {
    cur.x = project(p.omega, cur.x).y_star;
    outcome.projected_start = true;
  }

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  EstimatorReport rep = evaluate_estimators(p, cur.x, cur.lambda, cur.mu, config.inner_tol);
  double e_best = rep.e1;
  double q = config.q0;
  int k = 0;
  int phase = 1;

  auto push_record = [&](const LogRecord& rec) { outcome.log.push_back(rec); };
  auto finish = [&](SolveStatus status) {
    outcome.status = status;
    outcome.final_iterate = cur;
    const EstimatorReport final_rep = evaluate_estimators(p, cur.x, cur.lambda, cur.mu, config.inner_tol);
    outcome.final_e1 = final_rep.e1;
    outcome.final_em1 = final_rep.em1;
    outcome.final_e0 = final_rep.e0;
    outcome.counters = *counters;
    return outcome;
  };

  while (k < config.max_outer) {
    if (phase == 1) {
      // Penalty growth on every phase-one entry, using the best error so far.
      q *= e_best > 0 ? std::max(config.phi, 1.0 / e_best) : config.phi;
      while (k < config.max_outer) {
        const Vector mu1 = mu_of_x(p, cur.x, safeguard_lambda(cur.lambda, config.lambda_bar), q);
        const EstimatorReport guard = evaluate_estimators(p, cur.x, cur.lambda, mu1, config.inner_tol);
        // The multiplier estimator alone can vanish at infeasible points
        // (the reconstructed mu absorbs the stationarity residual), so the
        // termination test also demands E_c <= eps.
        if (guard.em1 <= config.eps && guard.ec <= config.eps) {
          cur.mu = mu1;
          return finish(SolveStatus::Converged);
        }
        const double em1_guard = guard.em1;
        const double ec_prev = rep.ec;
        cur = global_step(p, cur, q, config);
        rep = evaluate_estimators(p, cur.x, cur.lambda, cur.mu, config.inner_tol);
        e_best = std::min(e_best, rep.e1);
        ++k;
        ++outcome.phase1_steps;
        LogRecord rec;
        rec.k = k;
        rec.phase = 1;
        rec.q = q;
        rec.e = e_best;
        rec.e0 = rep.e0;
        rec.e1 = rep.e1;
        rec.em1 = rep.em1;
        rec.ec = rep.ec;
        rec.em1_mu1 = em1_guard;
        rec.wall_time_sec = elapsed();
        push_record(rec);
        if (rep.em1 <= config.theta * ec_prev) {
          phase = 2;
          break;
        }
      }
    } else {
      bool back_to_phase1 = false;
      while (k < config.max_outer) {
        if (rep.em1 <= config.eps && rep.ec <= config.eps) return finish(SolveStatus::Converged);
        const LocalStepResult ls = local_step(p, cur, config);
        LogRecord rec;
        rec.phase = 2;
        rec.q = q;
        rec.constraint_iters = ls.constraint_trace.steps();
        rec.multiplier_iters = ls.multiplier_trace ? ls.multiplier_trace->steps() : 0;
        rec.alpha_failure = ls.constraint_trace.outcome == ConstraintStepOutcome::AlphaFailure;
        rec.backtrack_floor = ls.constraint_trace.outcome == ConstraintStepOutcome::BacktrackFloor;
        rec.decrease_failure =
            ls.multiplier_trace && ls.multiplier_trace->outcome == MultiplierStepOutcome::DecreaseFailure;
        if (ls.failed) {
          rec.k = k;
          rec.accepted = false;
          rec.e = e_best;
          rec.e0 = rep.e0;
          rec.e1 = rep.e1;
          rec.em1 = rep.em1;
          rec.ec = rep.ec;
          rec.wall_time_sec = elapsed();
          push_record(rec);
          back_to_phase1 = true;
          break;
        }
        const EstimatorReport cand = evaluate_estimators(p, ls.result.x, ls.result.lambda, ls.result.mu,
                                                         config.inner_tol);
        if (cand.e1 > config.theta * rep.e1) {
          rec.k = k;
          rec.accepted = false;
          rec.rejected = true;
          rec.e = e_best;
          rec.e0 = rep.e0;
          rec.e1 = rep.e1;
          rec.em1 = rep.em1;
          rec.ec = rep.ec;
          rec.wall_time_sec = elapsed();
          push_record(rec);
          back_to_phase1 = true;
          break;
        }
        cur = ls.result;
        rep = cand;
        e_best = std::min(e_best, rep.e1);
        ++k;
        ++outcome.phase2_steps;
        rec.k = k;
        rec.accepted = true;
        rec.e = e_best;
        rec.e0 = rep.e0;
        rec.e1 = rep.e1;
        rec.em1 = rep.em1;
        rec.ec = rep.ec;
        rec.wall_time_sec = elapsed();
        push_record(rec);
      }
      if (back_to_phase1) {
        phase = 1;
      } else if (rep.em1 <= config.eps && rep.ec <= config.eps) {
        return finish(SolveStatus::Converged);
      }
    }
  }
  return finish(SolveStatus::MaxOuterIterations);
}

RateFit fit_convergence_order(const std::vector<double>& errors, int window) {
  if (window < 3) throw std::invalid_argument("fit_convergence_order: window must be >= 3");
  if (static_cast<int>(errors.size()) < window)
    throw std::invalid_argument("fit_convergence_order: not enough entries");
  const int start = static_cast<int>(errors.size()) - window;
  std::vector<double> tail(errors.begin() + start, errors.end());
  for (double v : tail) {
    if (!(v > 0)) throw std::invalid_argument("fit_convergence_order: errors must be strictly positive");
  }
  const int npairs = window - 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < npairs; ++i) {
    const double x = std::log(tail[static_cast<size_t>(i)]);
    const double y = std::log(tail[static_cast<size_t>(i + 1)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = npairs * sxx - sx * sx;
  RateFit fit;
  fit.pairs = npairs;
  if (std::abs(denom) < 1e-14 * (1.0 + sxx)) {
    // All tail errors equal: no slope information.
    throw std::invalid_argument("fit_convergence_order: degenerate tail");
  }
  fit.order = (npairs * sxy - sx * sy) / denom;
  fit.constant = std::exp((sy - fit.order * sx) / npairs);
  return fit;
}

}  // namespace npasa
