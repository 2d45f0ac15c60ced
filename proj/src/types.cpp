#include "npasa/types.hpp"

#include <cmath>
#include <sstream>

namespace npasa {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Polyhedron::Polyhedron(Matrix A_, Vector row_lo_, Vector row_hi_, Vector box_lo_, Vector box_hi_)
    : A(std::move(A_)),
      row_lo(std::move(row_lo_)),
      row_hi(std::move(row_hi_)),
      box_lo(std::move(box_lo_)),
      box_hi(std::move(box_hi_)) {
  validate();
}

Polyhedron Polyhedron::box(Vector lo, Vector hi) {
  Polyhedron p;
  const int n = static_cast<int>(lo.size());
  p.A.resize(0, n);
  p.row_lo.resize(0);
  p.row_hi.resize(0);
  p.box_lo = std::move(lo);
  p.box_hi = std::move(hi);
  p.validate();
  return p;
}

Polyhedron Polyhedron::free_space(int n) {
  return box(Vector::Constant(n, -kInf), Vector::Constant(n, kInf));
}

void Polyhedron::validate() const {
  const int nr = rows();
  const int nv = n();
  require(A.cols() == nv, "polyhedron: A column count must equal n");
  require(row_lo.size() == nr && row_hi.size() == nr, "polyhedron: row bound lengths must equal A rows");
  require(box_hi.size() == nv, "polyhedron: box bound lengths must equal n");
  for (int j = 0; j < nr; ++j) {
    require(!std::isnan(row_lo[j]) && !std::isnan(row_hi[j]), "polyhedron: NaN row bound");
    require(row_lo[j] <= row_hi[j], "polyhedron: row_lo > row_hi at row " + std::to_string(j));
  }
  for (int i = 0; i < nv; ++i) {
    require(!std::isnan(box_lo[i]) && !std::isnan(box_hi[i]), "polyhedron: NaN box bound");
    require(box_lo[i] <= box_hi[i], "polyhedron: box_lo > box_hi at index " + std::to_string(i));
  }
  require(A.allFinite(), "polyhedron: A must be finite");
}

Vector Polyhedron::stacked_residual(const Vector& x) const {
  if (x.size() != n()) throw DimensionError("stacked_residual: x has wrong length");
  const int nr = rows();
  const int nv = n();
  Vector r(stacked_size());
  if (nr > 0) {
    const Vector ax = A * x;
    r.segment(0, nr) = row_lo - ax;
    r.segment(nr, nr) = ax - row_hi;
  }
  r.segment(2 * nr, nv) = box_lo - x;
  r.segment(2 * nr + nv, nv) = x - box_hi;
  return r;
}

bool Polyhedron::is_feasible(const Vector& x, double tol) const {
  const Vector r = stacked_residual(x);
  for (int i = 0; i < r.size(); ++i) {
    if (std::isnan(r[i]) || r[i] > tol) return false;
  }
  return true;
}

Vector Polyhedron::stacked_jacobian_transpose(const Vector& mu) const {
  if (mu.size() != stacked_size()) throw DimensionError("stacked_jacobian_transpose: mu has wrong length");
  const int nr = rows();
  const int nv = n();
  Vector out = Vector::Zero(nv);
  if (nr > 0) {
    out += A.transpose() * (mu.segment(nr, nr) - mu.segment(0, nr));
  }
  out -= mu.segment(2 * nr, nv);
  out += mu.segment(2 * nr + nv, nv);
  return out;
}

double Polyhedron::stacked_dot(const Vector& mu, const Vector& r) {
  if (mu.size() != r.size()) throw DimensionError("stacked_dot: length mismatch");
  double s = 0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu[i] != 0.0) s += mu[i] * r[i];
  }
  return s;
}

std::vector<bool> Polyhedron::finite_rows() const {
  const int nr = rows();
  const int nv = n();
  std::vector<bool> mask(stacked_size());
  for (int j = 0; j < nr; ++j) {
    mask[j] = std::isfinite(row_lo[j]);
    mask[nr + j] = std::isfinite(row_hi[j]);
  }
  for (int i = 0; i < nv; ++i) {
    mask[2 * nr + i] = std::isfinite(box_lo[i]);
    mask[2 * nr + nv + i] = std::isfinite(box_hi[i]);
  }
  return mask;
}

Polyhedron Polyhedron::with_equality_rows(const Matrix& extra_A, const Vector& extra_rhs) const {
  if (extra_A.cols() != n()) throw DimensionError("with_equality_rows: column count mismatch");
  if (extra_A.rows() != extra_rhs.size()) throw DimensionError("with_equality_rows: rhs length mismatch");
  Polyhedron out = *this;
  const int nr = rows();
  const int k = static_cast<int>(extra_A.rows());
  out.A.conservativeResize(nr + k, n());
  out.A.bottomRows(k) = extra_A;
  out.row_lo.conservativeResize(nr + k);
  out.row_hi.conservativeResize(nr + k);
  out.row_lo.tail(k) = extra_rhs;
  out.row_hi.tail(k) = extra_rhs;
  return out;
}

double NlpProblem::eval_f(const Vector& x) const {
  if (x.size() != n) throw DimensionError("eval_f: x has wrong length");
  return f(x);
}

Vector NlpProblem::eval_grad_f(const Vector& x) const {
  if (x.size() != n) throw DimensionError("eval_grad_f: x has wrong length");
  Vector g = grad_f(x);
  if (g.size() != n) throw DimensionError("grad_f evaluator returned wrong length");
  return g;
}

Vector NlpProblem::eval_h(const Vector& x) const {
  if (x.size() != n) throw DimensionError("eval_h: x has wrong length");
  if (ell == 0) return Vector(0);
  Vector v = h(x);
  if (v.size() != ell) throw DimensionError("h evaluator returned wrong length");
  return v;
}

Matrix NlpProblem::eval_jac_h(const Vector& x) const {
  if (x.size() != n) throw DimensionError("eval_jac_h: x has wrong length");
  if (ell == 0) return Matrix::Zero(0, n);
  Matrix J = jac_h(x);
  if (J.rows() != ell || J.cols() != n) throw DimensionError("jac_h evaluator returned wrong shape");
  return J;
}

void SolverConfig::validate() const {
  require(eps >= 0, "config: eps must be >= 0");
  require(theta > 0 && theta < 1, "config: theta must lie in (0,1)");
  require(phi > 1, "config: phi must be > 1");
  require(lambda_bar > 0, "config: lambda_bar must be > 0");
  require(q0 >= 1, "config: q0 must be >= 1");
  require(alpha > 0 && alpha <= 1, "config: alpha must lie in (0,1]");
  require(beta >= 1, "config: beta must be >= 1");
  require(sigma > 0 && sigma < 1, "config: sigma must lie in (0,1)");
  require(tau > 0 && tau < 1, "config: tau must lie in (0,1)");
  require(p_init >= 1, "config: p_init must be >= 1");
  require(delta > 0 && delta < 1, "config: delta must lie in (0,1)");
  require(gamma > 0, "config: gamma must be > 0");
  require(inner_tol > 0, "config: inner_tol must be > 0");
  require(max_outer > 0, "config: max_outer must be positive");
  require(max_constraint_iters > 0, "config: max_constraint_iters must be positive");
  require(max_multiplier_iters > 0, "config: max_multiplier_iters must be positive");
  require(max_backtracks > 0, "config: max_backtracks must be positive");
  require(s_min > 0 && s_min < 1, "config: s_min must lie in (0,1)");
}

}  // namespace npasa
