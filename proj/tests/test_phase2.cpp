#include "npasa/driver.hpp"
#include "npasa/estimators.hpp"
#include "npasa/phase2.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace npasa;
using namespace npasa::testing;

TEST_CASE("choose_penalty formula and preconditions") {
  CHECK(choose_penalty(0.1, 1.0) == doctest::Approx(100.0));
  CHECK(choose_penalty(10.0, 2.0) == doctest::Approx(4.0));
  CHECK(choose_penalty(1.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(choose_penalty(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(choose_penalty(1.0, 0.5), std::invalid_argument);
}

namespace {

// h(w) = w over the interval [-10, 10], objective flat so the input
// E_{m,1} is exactly zero and the loop runs on E_c alone.
NlpProblem scalar_restoration_problem() {
  NlpProblem p;
  p.n = 1;
  p.ell = 1;
  p.omega = Polyhedron::box(vec({-10}), vec({10}));
  p.f = [](const Vector&) { return 0.0; };
  p.grad_f = [](const Vector&) { return vec({0}); };
  p.hess_f = [](const Vector&) { return Matrix::Zero(1, 1); };
  p.h = [](const Vector& x) { return vec({x[0]}); };
  p.jac_h = [](const Vector&) { return mat(1, 1, {1}); };
  p.hess_h_weighted = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1); };
  return p;
}

}  // namespace

TEST_CASE("constraint step on the scalar toy walks the documented first iteration") {
  const NlpProblem p = scalar_restoration_problem();
  SolverConfig config;
  config.beta = 1.0;
  config.tau = 0.1;
  config.eps = 0.0;
  config.max_constraint_iters = 30;
  const ConstraintStepTrace trace = constraint_step(p, vec({1}), vec({0}), Vector::Zero(2), config);
  REQUIRE(trace.steps() >= 1);
  CHECK(trace.penalties[0] == doctest::Approx(1.0));
  CHECK(trace.iterates[1][0] == doctest::Approx(0.5));
  CHECK(trace.slack_norms[0] == doctest::Approx(0.5));
  CHECK(trace.alphas[0] == doctest::Approx(0.5));
  CHECK(trace.step_sizes[0] == doctest::Approx(1.0));
  // E_{m,1} of the input triple is 0, so the loop runs until h underflows.
  CHECK(trace.outcome == ConstraintStepOutcome::Success);
  CHECK(trace.h_norms.back() == 0.0);
}

TEST_CASE("constraint step returns immediately when the guard already holds") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  // At the KKT triple E_c = 0 <= theta * E_{m,1}.
  const ConstraintStepTrace trace =
      constraint_step(cp.problem, cp.x_star, cp.lambda_star, cp.mu_star, config);
  CHECK(trace.outcome == ConstraintStepOutcome::Success);
  CHECK(trace.steps() == 0);
  CHECK((trace.w() - cp.x_star).norm() == 0.0);
}

TEST_CASE("constraint step decays quadratically on circle-interior") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  config.theta = 1e-30;  // force the loop to run to the numerical floor
  config.eps = 0.0;
  config.max_constraint_iters = 12;
  const Vector w0 = vec({1.1, 1.1});
  const ConstraintStepTrace trace = constraint_step(cp.problem, w0, cp.lambda_star, cp.mu_star, config);
  REQUIRE(trace.h_norms.size() >= 4);
  CHECK(trace.h_norms[0] == doctest::Approx(0.42));
  for (size_t i = 0; i + 1 < trace.h_norms.size(); ++i) {
    const double hi = trace.h_norms[i];
    const double hn = trace.h_norms[i + 1];
    if (hi <= 1e-12 || hi == 0.0) break;
    CHECK(hn <= 10.0 * hi * hi);
    // Armijo accepts the full step after the first iteration.
    if (i >= 1) CHECK(trace.step_sizes[i] == doctest::Approx(1.0));
  }
  // Every accepted step contracts ||h|| by its Armijo factor.
  for (size_t i = 0; i < trace.penalties.size() && i + 1 < trace.h_norms.size(); ++i) {
    const double bound = (1.0 - config.tau * trace.alphas[i] * trace.step_sizes[i]) * trace.h_norms[i];
    CHECK(trace.h_norms[i + 1] <= bound + 1e-15);
  }
}

TEST_CASE("multiplier step leaves the guard immediately when satisfied") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  const MultiplierStepTrace trace = multiplier_step(cp.problem, cp.x_star, 1.0, config);
  CHECK(trace.outcome == MultiplierStepOutcome::Success);
  CHECK(trace.steps() == 0);
}

TEST_CASE("multiplier step at an exact KKT point recovers multipliers to O(gamma)") {
  for (const auto& name : {"lin-eq-box", "circle-interior", "circle-min"}) {
    const auto& cp = corpus_problem(name);
    SolverConfig config;
    const MultiplierStepTrace trace = multiplier_step(cp.problem, cp.x_star, 1e-6, config);
    CHECK(trace.outcome == MultiplierStepOutcome::Success);
    CHECK((trace.nu() - cp.lambda_star).norm() <= 1e-4);
    CHECK(trace.em1_values.front() <= 1e-6);
  }
}

TEST_CASE("multiplier step contracts quadratically near the solution") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  config.max_multiplier_iters = 8;
  // Feasible point near x* obtained by radially rescaling a nearby point.
  Vector z0 = vec({0.985, 1.012});
  z0 *= std::sqrt(2.0) / z0.norm();
  const MultiplierStepTrace trace = multiplier_step(cp.problem, z0, 1e-31, config);
  REQUIRE(trace.em1_values.size() >= 3);
  for (size_t i = 0; i + 1 < trace.em1_values.size(); ++i) {
    const double cur = trace.em1_values[i];
    const double nxt = trace.em1_values[i + 1];
    if (cur <= 1e-14) break;
    CHECK(nxt <= 100.0 * cur * cur + 1e-16);
    CHECK(nxt <= config.delta * cur + 1e-16);
  }
  // Stays on the linearization manifold of each iterate.
  for (size_t i = 0; i + 1 < trace.z_iterates.size(); ++i) {
    const Vector& zi = trace.z_iterates[i];
    const Vector& zn = trace.z_iterates[i + 1];
    const Vector drift = cp.problem.eval_jac_h(zi) * (zn - zi);
    CHECK(drift.norm() <= 1e-8 * (1.0 + (zn - zi).norm()));
  }
}

TEST_CASE("alpha failure hands back the input triple unchanged") {
  // h(x) = x1^2 + 0.5 has a singular Jacobian row at x1 = 0, so the
  // linearized subproblem cannot reduce the slack and alpha < alpha_min.
  NlpProblem p;
  p.n = 2;
  p.ell = 1;
  p.omega = Polyhedron::box(vec({-5, -5}), vec({5, 5}));
  p.f = [](const Vector& x) { return 0.5 * (x - vec({0, 1})).squaredNorm(); };
  p.grad_f = [](const Vector& x) { return Vector(x - vec({0, 1})); };
  p.hess_f = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
  p.h = [](const Vector& x) { return vec({x[0] * x[0] + 0.5}); };
  p.jac_h = [](const Vector& x) { return mat(1, 2, {2.0 * x[0], 0.0}); };
  p.hess_h_weighted = [](const Vector&, const Vector& w) {
    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = 2.0 * w[0];
    return H;
  };

  SolverConfig config;
  Iterate it;
  it.x = vec({0, 1});
  it.lambda = vec({0});
  it.mu = Vector::Zero(4);
  it.mu[0] = 1e-3;
  const LocalStepResult res = local_step(p, it, config);
  CHECK(res.failed);
  CHECK(res.constraint_trace.outcome == ConstraintStepOutcome::AlphaFailure);
  CHECK(res.result.x == it.x);
  CHECK(res.result.lambda == it.lambda);
  CHECK(res.result.mu == it.mu);
}

TEST_CASE("adversarial delta triggers a decrease failure with the input returned") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  config.delta = 1e-13;  // unreachable contraction demand
  config.theta = 1e-30;
  Vector z0 = vec({0.7, 1.2});
  z0 *= std::sqrt(2.0) / z0.norm();
  const MultiplierStepTrace trace = multiplier_step(cp.problem, z0, 1e-31, config);
  CHECK(trace.outcome == MultiplierStepOutcome::DecreaseFailure);

  Iterate it;
  it.x = z0;
  it.lambda = vec({0.1});
  it.mu = Vector::Zero(4);
  const LocalStepResult res = local_step(cp.problem, it, config);
  CHECK(res.failed);
  CHECK(res.result.x == it.x);
  CHECK(res.result.lambda == it.lambda);
  CHECK(res.result.mu == it.mu);
}
