#include "npasa/driver.hpp"

#include <cmath>

namespace npasa {

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

QuadraticNlpSpec make_lin_eq_box() {
  // min 0.5||x||^2  s.t.  x1 + x2 = 2,  x >= 0.
  QuadraticNlpSpec s;
  s.name = "lin-eq-box";
  s.n = 2;
  s.ell = 1;
  s.Q = Matrix::Identity(2, 2);
  s.c = Vector::Zero(2);
  QuadraticConstraint con;
  con.P = Matrix::Zero(2, 2);
  con.a = vec2(1, 1);
  con.b = -2;
  s.constraints.push_back(con);
  s.poly = Polyhedron::box(Vector::Zero(2), Vector::Constant(2, kInf));
  return s;
}

QuadraticNlpSpec make_circle(const Vector& cost, const std::string& name) {
  // min cost'x  s.t.  x1^2 + x2^2 = 2,  x >= 0.
  QuadraticNlpSpec s;
  s.name = name;
  s.n = 2;
  s.ell = 1;
  s.Q = Matrix::Zero(2, 2);
  s.c = cost;
  QuadraticConstraint con;
  con.P = 2.0 * Matrix::Identity(2, 2);
  con.a = Vector::Zero(2);
  con.b = -2;
  s.constraints.push_back(con);
  s.poly = Polyhedron::box(Vector::Zero(2), Vector::Constant(2, kInf));
  return s;
}

NlpProblem make_rosen_circle() {
  // min (1-x1)^2 + 100 (x2 - x1^2)^2  s.t.  x1^2 + x2^2 = 2,  x free.
  NlpProblem p;
  p.n = 2;
  p.ell = 1;
  p.omega = Polyhedron::free_space(2);
  p.f = [](const Vector& x) {
    const double t = x[1] - x[0] * x[0];
    return (1 - x[0]) * (1 - x[0]) + 100.0 * t * t;
  };
  p.grad_f = [](const Vector& x) {
    const double t = x[1] - x[0] * x[0];
    return vec2(-2.0 * (1 - x[0]) - 400.0 * t * x[0], 200.0 * t);
  };
  p.hess_f = [](const Vector& x) {
    Matrix H(2, 2);
    H(0, 0) = 2.0 - 400.0 * (x[1] - 3.0 * x[0] * x[0]);
    H(0, 1) = -400.0 * x[0];
    H(1, 0) = H(0, 1);
    H(1, 1) = 200.0;
    return H;
  };
  p.h = [](const Vector& x) { return vec1(x[0] * x[0] + x[1] * x[1] - 2.0); };
  p.jac_h = [](const Vector& x) {
    Matrix J(1, 2);
    J << 2.0 * x[0], 2.0 * x[1];
    return J;
  };
  p.hess_h_weighted = [](const Vector&, const Vector& w) { return Matrix(2.0 * w[0] * Matrix::Identity(2, 2)); };
  return p;
}

std::vector<CorpusProblem> build_corpus() {
  std::vector<CorpusProblem> out;

  {
    CorpusProblem c;
    c.quadratic = make_lin_eq_box();
    c.name = c.quadratic->name;
    c.problem = c.quadratic->to_problem();
    c.x_star = vec2(1, 1);
    c.lambda_star = vec1(-1);
    c.mu_star = Vector::Zero(4);
    c.default_x0 = vec2(2, 0);
    c.default_lambda0 = vec1(0);
    out.push_back(std::move(c));
  }
  {
    CorpusProblem c;
    c.quadratic = make_circle(vec2(1, 1), "circle-min");
    c.name = c.quadratic->name;
    c.problem = c.quadratic->to_problem();
    c.x_star = vec2(std::sqrt(2.0), 0);
    c.lambda_star = vec1(-1.0 / (2.0 * std::sqrt(2.0)));
    c.mu_star = Vector::Zero(4);
    c.mu_star[1] = 1.0;  // lower-bound multiplier of the active x2 >= 0
    c.alt_x_star.push_back(vec2(0, std::sqrt(2.0)));
    c.default_x0 = vec2(1.5, 0.2);
    c.default_lambda0 = vec1(0);
    out.push_back(std::move(c));
  }
  {
    CorpusProblem c;
    c.quadratic = make_circle(vec2(-1, -1), "circle-interior");
    c.name = c.quadratic->name;
    c.problem = c.quadratic->to_problem();
    c.x_star = vec2(1, 1);
    c.lambda_star = vec1(0.5);
    c.mu_star = Vector::Zero(4);
    c.default_x0 = vec2(0.9, 1.05);
    c.default_lambda0 = vec1(0.4);
    out.push_back(std::move(c));
  }
  {
    CorpusProblem c;
    c.name = "rosen-circle";
    c.problem = make_rosen_circle();
    c.x_star = vec2(1, 1);
    c.lambda_star = vec1(0);
    c.mu_star = Vector::Zero(4);
    c.default_x0 = vec2(1.2, 0.7);
    c.default_lambda0 = vec1(0);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

const std::vector<CorpusProblem>& corpus() {
  static const std::vector<CorpusProblem> problems = build_corpus();
  return problems;
}

const CorpusProblem& corpus_problem(const std::string& name) {
  for (const auto& c : corpus()) {
    if (c.name == name) return c;
  }
  throw std::invalid_argument("unknown corpus problem '" + name + "'");
}

}  // namespace npasa
