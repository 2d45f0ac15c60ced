#pragma once

#include "npasa/driver.hpp"
#include "npasa/types.hpp"

#include <random>

namespace npasa::testing {

inline Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

inline Matrix mat(int rows, int cols, std::initializer_list<double> vals) {
  Matrix m(rows, cols);
  auto it = vals.begin();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = *it++;
  }
  return m;
}

/// Feasible random point of a polyhedron with finite-or-infinite bounds:
/// random box point, projected when rows are present.
Vector random_feasible_point(const Polyhedron& poly, std::mt19937& rng);

/// Random polyhedron containing a known interior-ish point, with a mix of
/// finite and infinite bounds.
Polyhedron random_polyhedron(int n, int m_rows, std::mt19937& rng);

}  // namespace npasa::testing
