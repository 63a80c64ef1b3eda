#pragma once

#include <cmath>

#include "tegnas/numkit/eig.hpp"
#include "tegnas/numkit/matrix.hpp"

namespace tegnas::numkit {

namespace detail {

inline Matrix cholesky_solve(const Matrix& l, const Matrix& b) {
  const std::size_t n = l.rows();
  Matrix x = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

}  // namespace detail

/// Solves (a + ridge*I) x = b for symmetric positive semidefinite `a` via
/// Cholesky with one step of iterative refinement.
inline Matrix solve_spd(const Matrix& a, const Matrix& b, double ridge = 0.0) {
  require_symmetric(a);
  if (b.rows() != a.rows()) throw Error(Errc::ShapeMismatch, "right-hand side row count differs");
  if (!(ridge >= 0.0)) throw Error(Errc::ShapeMismatch, "ridge must be non-negative");
  const std::size_t n = a.rows();

  Matrix shifted = a;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) += ridge;
  const double pivot_floor = 1e-14 * std::abs(shifted.trace());

  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = shifted(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > pivot_floor)) throw Error(Errc::SingularSystem, "pivot below 1e-14*trace");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.5 * (shifted(i, j) + shifted(j, i));
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }

  Matrix x = detail::cholesky_solve(l, b);
  Matrix residual = b - shifted * x;
  x += detail::cholesky_solve(l, residual);
  return x;
}

}  // namespace tegnas::numkit
