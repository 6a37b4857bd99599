#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "jdqml/errors.hpp"

namespace jdqml {

/// In-place lower Cholesky factor of a small row-major symmetric matrix.
/// Returns false when the matrix is not positive definite.
inline bool cholesky(std::span<double> a, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (!(diag > 0.0)) return false;
    const double root = std::sqrt(diag);
    a[j * d + j] = root;
    for (std::size_t i = j + 1; i < d; ++i) {
      double off = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) off -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = off / root;
    }
  }
  return true;
}

/// log det of an SPD matrix given its lower Cholesky factor.
inline double cholesky_logdet(std::span<const double> chol, std::size_t d) {
  double logdet = 0.0;
  for (std::size_t j = 0; j < d; ++j) logdet += std::log(chol[j * d + j]);
  return 2.0 * logdet;
}

/// Given the lower Cholesky factor of S, returns v^T S^{-1} v.
inline double cholesky_quadratic(std::span<const double> chol, std::size_t d,
                                 std::span<const double> v, std::span<double> scratch) {
  // Forward-solve L y = v, then |y|^2 = v^T S^{-1} v.
  double quad = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double y = v[i];
    for (std::size_t k = 0; k < i; ++k) y -= chol[i * d + k] * scratch[k];
    y /= chol[i * d + i];
    scratch[i] = y;
    quad += y * y;
  }
  return quad;
}

}  // namespace jdqml
