#include "npasa/driver.hpp"
#include "npasa/estimators.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

using namespace npasa;
using namespace npasa::testing;

TEST_CASE("fit_convergence_order identifies exact rates") {
  const RateFit quad = fit_convergence_order({1e-1, 1e-2, 1e-4, 1e-8}, 4);
  CHECK(quad.order == doctest::Approx(2.0).epsilon(1e-9));
  const RateFit lin = fit_convergence_order({1e-1, 5e-2, 2.5e-2}, 3);
  CHECK(lin.order == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(fit_convergence_order({1e-1, 1e-2}, 3), std::invalid_argument);
  CHECK_THROWS_AS(fit_convergence_order({1e-1, 0.0, 1e-2}, 3), std::invalid_argument);
}

TEST_CASE("npasa solves lin-eq-box from the documented cold start") {
  const auto& cp = corpus_problem("lin-eq-box");
  SolverConfig config;
  config.eps = 1e-8;
  const SolveOutcome out =
      npasa_solve(cp.problem, cp.default_x0, cp.default_lambda0, Vector::Zero(4), config);
  CHECK(out.status == SolveStatus::Converged);
  CHECK((out.final_iterate.x - cp.x_star).norm() <= 1e-6);
  CHECK((out.final_iterate.lambda - cp.lambda_star).norm() <= 1e-6);
  CHECK(out.final_em1 <= config.eps);
  CHECK(out.log.size() <= 50);
}

TEST_CASE("npasa returns immediately from an exact KKT triple") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  const SolveOutcome out = npasa_solve(cp.problem, cp.x_star, cp.lambda_star, cp.mu_star, config);
  CHECK(out.status == SolveStatus::Converged);
  CHECK(out.log.empty());
  CHECK((out.final_iterate.x - cp.x_star).norm() == 0.0);
}

TEST_CASE("npasa solves circle-interior with a phase-two tail of order >= 1.8") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  config.eps = 1e-17;
  // One restoration and one multiplier update per local step, so the outer
  // log carries the per-iteration contraction.
  config.max_constraint_iters = 1;
  config.max_multiplier_iters = 1;
  const SolveOutcome out =
      npasa_solve(cp.problem, cp.default_x0, cp.default_lambda0, Vector::Zero(4), config);
  CHECK(out.status == SolveStatus::Converged);
  CHECK((out.final_iterate.x - cp.x_star).norm() <= 1e-7);

  std::vector<double> fit_series;
  bool phase2_tail = true;
  for (const auto& rec : out.log) {
    if (rec.phase == 2 && rec.accepted) {
      if (rec.e1 > 1e-300) fit_series.push_back(rec.e1);
    } else if (fit_series.size() > 0) {
      phase2_tail = false;
    } else if (rec.phase == 1) {
      // Seed with the phase-two entry error.
      fit_series.assign(1, rec.e1);
    }
  }
  CHECK(phase2_tail);
  REQUIRE(fit_series.size() >= 3);
  const RateFit fit = fit_convergence_order(fit_series, static_cast<int>(fit_series.size()));
  CHECK(fit.order >= 1.8);
}

TEST_CASE("log invariants hold on a representative run") {
  const auto& cp = corpus_problem("circle-min");
  SolverConfig config;
  config.eps = 1e-12;
  const SolveOutcome out =
      npasa_solve(cp.problem, cp.default_x0, cp.default_lambda0, Vector::Zero(4), config);
  CHECK(out.status == SolveStatus::Converged);
  double prev_e = kInf;
  double prev_e1 = kInf;
  int prev_phase = 1;
  for (const auto& rec : out.log) {
    CHECK(rec.e <= prev_e + 1e-15);
    prev_e = rec.e;
    if (rec.phase == 2 && rec.accepted && prev_phase == 2 && std::isfinite(prev_e1)) {
      CHECK(rec.e1 <= config.theta * prev_e1 + 1e-15);
    }
    if (rec.accepted) prev_e1 = rec.e1;
    prev_phase = rec.phase;
  }
}

TEST_CASE("solve outcomes declare when the iteration cap is hit") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  config.max_outer = 1;
  const SolveOutcome out =
      npasa_solve(cp.problem, cp.default_x0, cp.default_lambda0, Vector::Zero(4), config);
  CHECK(out.status == SolveStatus::MaxOuterIterations);
  CHECK(out.log.size() == 1);
}

TEST_CASE("infeasible starts are projected and recorded") {
  const auto& cp = corpus_problem("lin-eq-box");
  SolverConfig config;
  const SolveOutcome out = npasa_solve(cp.problem, vec({-3, -4}), vec({0}), Vector::Zero(4), config);
  CHECK(out.projected_start);
  CHECK(out.status == SolveStatus::Converged);
}

TEST_CASE("log records round-trip through the line format") {
  LogRecord rec;
  rec.k = 3;
  rec.phase = 2;
  rec.q = 12.5;
  rec.e = 0.1 + 1e-17;
  rec.e0 = 0.325;
  rec.e1 = 0.017;
  rec.em1 = 1.7e-300;
  rec.ec = 0;
  rec.constraint_iters = 4;
  rec.multiplier_iters = 2;
  rec.accepted = false;
  rec.rejected = true;
  rec.wall_time_sec = 0.25;
  const std::string line = log_record_to_json(rec);
  const LogRecord back = log_record_from_json(line);
  CHECK(back.k == rec.k);
  CHECK(back.phase == rec.phase);
  CHECK(back.q == rec.q);
  CHECK(back.e == rec.e);
  CHECK(back.e0.has_value());
  CHECK(*back.e0 == *rec.e0);
  CHECK(back.em1 == rec.em1);
  CHECK(back.rejected == rec.rejected);

  CHECK_THROWS_AS(log_record_from_json("not json"), ParseError);

  const auto& cp = corpus_problem("lin-eq-box");
  SolverConfig config;
  const SolveOutcome out =
      npasa_solve(cp.problem, cp.default_x0, cp.default_lambda0, Vector::Zero(4), config);
  const std::string path = "test_driver_log.jsonl";
  write_log_file(path, out.log);
  const auto log2 = read_log_file(path);
  REQUIRE(log2.size() == out.log.size());
  for (size_t i = 0; i < log2.size(); ++i) {
    CHECK(log2[i].e1 == out.log[i].e1);
    CHECK(log2[i].em1 == out.log[i].em1);
    CHECK(log2[i].phase == out.log[i].phase);
  }
  std::remove(path.c_str());
}

TEST_CASE("corpus problems carry consistent analytic data") {
  for (const auto& cp : corpus()) {
    CHECK(e1(cp.problem, cp.x_star, cp.lambda_star, cp.mu_star) <= 1e-10);
    CHECK(cp.problem.omega.is_feasible(cp.default_x0, 1e-12));

    // LICQ: active constraint gradients stacked with jac_h have full row rank.
    std::vector<Vector> rows;
    const Matrix Jh = cp.problem.eval_jac_h(cp.x_star);
    for (int j = 0; j < Jh.rows(); ++j) rows.push_back(Jh.row(j).transpose());
    const Vector r = cp.problem.omega.stacked_residual(cp.x_star);
    const auto finite = cp.problem.omega.finite_rows();
    const int nr = cp.problem.omega.rows();
    const int nv = cp.problem.omega.n();
    for (int i = 0; i < r.size(); ++i) {
      if (!finite[static_cast<size_t>(i)] || std::abs(r[i]) > 1e-9) continue;
      Vector g = Vector::Zero(nv);
      if (i < nr) {
        g = -cp.problem.omega.A.row(i).transpose();
      } else if (i < 2 * nr) {
        g = cp.problem.omega.A.row(i - nr).transpose();
      } else if (i < 2 * nr + nv) {
        g[i - 2 * nr] = -1.0;
      } else {
        g[i - 2 * nr - nv] = 1.0;
      }
      rows.push_back(g);
    }
    Matrix C(static_cast<Eigen::Index>(rows.size()), nv);
    for (size_t i = 0; i < rows.size(); ++i) C.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    Eigen::FullPivLU<Matrix> lu(C);
    lu.setThreshold(1e-8);
    CHECK(lu.rank() == C.rows());
  }

  // circle-min satisfies strict complementary slackness: per finite stacked
  // row exactly one of r_i and mu_i is zero.
  const auto& cm = corpus_problem("circle-min");
  const Vector r = cm.problem.omega.stacked_residual(cm.x_star);
  const auto finite = cm.problem.omega.finite_rows();
  for (int i = 0; i < r.size(); ++i) {
    if (!finite[static_cast<size_t>(i)]) continue;
    const bool r_zero = std::abs(r[i]) <= 1e-12;
    const bool mu_zero = std::abs(cm.mu_star[i]) <= 1e-12;
    CHECK(r_zero != mu_zero);
  }
}
