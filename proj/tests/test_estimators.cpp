#include "npasa/driver.hpp"
#include "npasa/estimators.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace npasa;
using namespace npasa::testing;

namespace {
const NlpProblem& lin_eq_box() { return corpus_problem("lin-eq-box").problem; }
}  // namespace

TEST_CASE("lagrangian gradient on lin-eq-box") {
  const auto& p = lin_eq_box();
  const Vector mu0 = Vector::Zero(4);
  CHECK(lagrangian_gradient(p, vec({1, 1}), vec({-1}), mu0).norm() == doctest::Approx(0.0));
  const Vector g = lagrangian_gradient(p, vec({1, 1}), vec({0}), mu0);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(1.0));
  // lambda = 0, mu = 0 reduces to grad f.
  const Vector x = vec({0.3, -0.7});
  CHECK((lagrangian_gradient(p, x, vec({0}), mu0) - p.eval_grad_f(x)).norm() == doctest::Approx(0.0));
}

TEST_CASE("phi_min componentwise minimum") {
  const Vector a = phi_min(vec({1, -2}), vec({0, 3}));
  CHECK(a[0] == 0.0);
  CHECK(a[1] == -2.0);
  CHECK(phi_min(vec({0, 0}), vec({0, 0})).norm() == 0.0);
  CHECK(phi_min(vec({kInf}), vec({2}))[0] == 2.0);
  CHECK_THROWS_AS(phi_min(vec({1}), vec({1, 2})), DimensionError);
}

TEST_CASE("e1 values on corpus problems") {
  const auto& p = lin_eq_box();
  const Vector mu0 = Vector::Zero(4);
  CHECK(e1(p, vec({1, 1}), vec({-1}), mu0) <= 1e-12);
  CHECK(e1(p, vec({1, 1}), vec({0}), mu0) == doctest::Approx(std::sqrt(2.0)));

  const auto& circ = corpus_problem("circle-interior").problem;
  CHECK(e1(circ, vec({1, 1}), vec({0.5}), Vector::Zero(4)) <= 1e-12);
}

TEST_CASE("e0 values and domain checks") {
  const auto& p = lin_eq_box();
  const Vector mu0 = Vector::Zero(4);
  CHECK(e0(p, vec({1, 1}), vec({0}), mu0) == doctest::Approx(std::sqrt(2.0)));

  // mu loaded on the active-side stacked row box_lo - x <= 0 for x1:
  // grad L = (1,1) - e1 = (0,1) and -mu'r = 1, so E0 = sqrt(1 + 0 + 1).
  Vector mu = Vector::Zero(4);
  mu[0] = 1.0;
  CHECK(e0(p, vec({1, 1}), vec({0}), mu) == doctest::Approx(std::sqrt(2.0)));

  Vector mu_neg = Vector::Zero(4);
  mu_neg[0] = -0.1;
  CHECK_THROWS_AS(e0(p, vec({1, 1}), vec({0}), mu_neg), DomainError);
  // Nonzero multiplier on an infinite-bound row leaves D_0.
  Vector mu_inf = Vector::Zero(4);
  mu_inf[2] = 0.5;
  CHECK_THROWS_AS(e0(p, vec({1, 1}), vec({0}), mu_inf), DomainError);
  // Infeasible x leaves D_0.
  CHECK_THROWS_AS(e0(p, vec({-1, 1}), vec({0}), mu0), DomainError);
}

TEST_CASE("e_c is the squared constraint norm") {
  const auto& p = lin_eq_box();
  CHECK(e_c(p, vec({1, 1})) == doctest::Approx(0.0));
  CHECK(e_c(p, vec({0, 0})) == doctest::Approx(4.0));
  const auto& circ = corpus_problem("circle-min").problem;
  CHECK(e_c(circ, vec({1, 1})) == doctest::Approx(0.0));
}

TEST_CASE("estimator ordering and decomposition over random samples") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> lam_d(-2.0, 2.0);
  std::uniform_real_distribution<double> mu_d(0.0, 2.0);
  for (const auto& cp : corpus()) {
    const auto& p = cp.problem;
    const auto finite = p.omega.finite_rows();
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = random_feasible_point(p.omega, rng);
      Vector lambda(p.ell);
      for (int i = 0; i < p.ell; ++i) lambda[i] = lam_d(rng);
      Vector mu = Vector::Zero(p.omega.stacked_size());
      for (int i = 0; i < mu.size(); ++i) {
        if (finite[static_cast<size_t>(i)]) mu[i] = mu_d(rng);
      }
      const EstimatorReport rep = evaluate_estimators(p, x, lambda, mu, 1e-8);
      REQUIRE(rep.e0.has_value());
      CHECK(rep.em1 <= *rep.em0 + 1e-12);
      CHECK(rep.e1 <= *rep.e0 + 1e-12);
      CHECK(std::abs(rep.e1 * rep.e1 - (rep.em1 + rep.ec)) <= 1e-10 * (1.0 + rep.e1 * rep.e1));
      CHECK(std::abs(*rep.e0 * *rep.e0 - (*rep.em0 + rep.ec)) <= 1e-10 * (1.0 + *rep.e0 * *rep.e0));
    }
  }
}

TEST_CASE("phi_min symmetry property") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a[i] = unit(rng);
      b[i] = unit(rng);
    }
    CHECK((phi_min(a, b) - phi_min(b, a)).norm() == 0.0);
  }
}

TEST_CASE("e1 vanishes exactly at corpus KKT triples") {
  for (const auto& cp : corpus()) {
    const double value = e1(cp.problem, cp.x_star, cp.lambda_star, cp.mu_star);
    CHECK(value <= 1e-10);
  }
}

TEST_CASE("tiny e1 implies the KKT residuals are tiny") {
  for (const auto& cp : corpus()) {
    const auto& p = cp.problem;
    const Vector& x = cp.x_star;
    const Vector& mu = cp.mu_star;
    CHECK(lagrangian_gradient(p, x, cp.lambda_star, mu).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(p.eval_h(x).lpNorm<Eigen::Infinity>() <= 1e-8);
    const Vector r = p.omega.stacked_residual(x);
    for (int i = 0; i < r.size(); ++i) CHECK(r[i] <= 1e-8);
    CHECK(mu.minCoeff() >= 0.0);
    CHECK(std::abs(Polyhedron::stacked_dot(mu, r)) <= 1e-8);
  }
}
