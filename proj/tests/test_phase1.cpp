#include "npasa/driver.hpp"
#include "npasa/estimators.hpp"
#include "npasa/oracle.hpp"
#include "npasa/phase1.hpp"
#include "npasa/projection.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace npasa;
using namespace npasa::testing;

TEST_CASE("safeguard_lambda clamps componentwise") {
  const Vector clamped = safeguard_lambda(vec({5, -0.3}), 1.0);
  CHECK(clamped[0] == 1.0);
  CHECK(clamped[1] == -0.3);
  CHECK((safeguard_lambda(vec({0.2, -0.9}), 1.0) - vec({0.2, -0.9})).norm() == 0.0);
  CHECK(safeguard_lambda(vec({-2}), 1.0)[0] == -1.0);
  CHECK_THROWS_AS(safeguard_lambda(vec({1}), 0.0), std::invalid_argument);
}

TEST_CASE("augmented Lagrangian derivatives are consistent") {
  const auto& cp = corpus_problem("circle-interior");
  AugmentedLagrangian lq;
  lq.problem = &cp.problem;
  lq.q = 3.0;
  lq.nu = vec({0.2});
  const Vector x = vec({0.8, 1.1});
  const Vector g = lq.gradient(x);
  const Vector g_fd = oracle::finite_diff_gradient([&](const Vector& y) { return lq.value(y); }, x, 1e-5);
  CHECK((g - g_fd).norm() <= 1e-5 * (1.0 + g.norm()));
}

TEST_CASE("global step on lin-eq-box matches the brute-force oracle") {
  const auto& cp = corpus_problem("lin-eq-box");
  const SolverConfig config;
  Iterate it;
  it.x = vec({2, 0});
  it.lambda = vec({0});
  it.mu = Vector::Zero(4);
  const double q = 4.0;
  const Iterate next = global_step(cp.problem, it, q, config);

  // L_q is itself a QP here: H = I + 2q aa', g = 2q b a with a = (1,1), b = -2.
  Matrix H = Matrix::Identity(2, 2);
  const Vector a = vec({1, 1});
  H += 2.0 * q * a * a.transpose();
  const Vector g = 2.0 * q * (-2.0) * a;
  const auto ref = oracle::brute_force_qp({H, g, cp.problem.omega});
  CHECK((next.x - ref.x).norm() <= 1e-7);
  CHECK((next.x - vec({16.0 / 17.0, 16.0 / 17.0})).norm() <= 1e-7);

  // lambda' - lbar = 2 q h(x') exactly.
  const double h_val = cp.problem.eval_h(next.x)[0];
  CHECK(next.lambda[0] == doctest::Approx(2.0 * q * h_val));
  CHECK(next.mu.minCoeff() >= 0.0);
}

TEST_CASE("global step is a fixed point at KKT triples") {
  for (const auto& name : {"lin-eq-box", "circle-interior"}) {
    const auto& cp = corpus_problem(name);
    SolverConfig config;
    Iterate it{cp.x_star, cp.lambda_star, cp.mu_star};
    const Iterate next = global_step(cp.problem, it, 4.0, config);
    CHECK((next.x - cp.x_star).norm() <= 1e-8);
    CHECK((next.lambda - cp.lambda_star).norm() <= 1e-7);
    CHECK(e1(cp.problem, next.x, next.lambda, next.mu) <= 1e-7);
  }
}

TEST_CASE("global step output is stationary for the augmented Lagrangian") {
  const auto& cp = corpus_problem("circle-interior");
  SolverConfig config;
  Iterate it;
  it.x = vec({0.5, 0.8});
  it.lambda = vec({0});
  it.mu = Vector::Zero(4);
  const double q = 2.0;
  const Iterate next = global_step(cp.problem, it, q, config);

  AugmentedLagrangian lq;
  lq.problem = &cp.problem;
  lq.q = q;
  lq.nu = safeguard_lambda(it.lambda, config.lambda_bar);
  const Vector g = lq.gradient(next.x);
  const Vector proj = project(cp.problem.omega, next.x - g).y_star;
  CHECK((next.x - proj).norm() <= 10 * config.inner_tol);

  // Multipliers on infinite-bound rows stay pinned at zero.
  const auto finite = cp.problem.omega.finite_rows();
  for (int i = 0; i < next.mu.size(); ++i) {
    if (!finite[static_cast<size_t>(i)]) CHECK(next.mu[i] == 0.0);
  }
  CHECK(next.mu.minCoeff() >= 0.0);
}

TEST_CASE("safeguarded multiplier feeds the first-order update") {
  // lambda = 5 clamped to lbar = 1; with q = 4 and h(x') = 0.25 the update
  // gives 1 + 2*4*0.25 = 3.
  const double lbar = 1.0;
  const double q = 4.0;
  const double h_val = 0.25;
  const double lambda_prime = safeguard_lambda(vec({5}), lbar)[0] + 2.0 * q * h_val;
  CHECK(lambda_prime == doctest::Approx(3.0));
}
