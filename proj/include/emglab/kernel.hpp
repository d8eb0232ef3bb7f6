#pragma once

#include <cmath>
#include <cstddef>

#include "emglab/errors.hpp"
#include "emglab/matrix.hpp"
#include "emglab/numeric_util.hpp"

namespace emglab {

/// RBF Gram matrix K_ij = exp(-(g_i - g_j)^2 / (2 l^2)).
inline Matrix rbf_kernel(const Vec& grid, double lengthscale) {
  if (!(lengthscale > 0.0)) throw DomainError("rbf_kernel: lengthscale must be > 0");
  const std::size_t n = grid.size();
  Matrix k(n, n);
  const double inv = 1.0 / (2.0 * lengthscale * lengthscale);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = grid[i] - grid[j];
      const double kij = std::exp(-d * d * inv);
      k(i, j) = kij;
      k(j, i) = kij;
    }
  }
  return k;
}

/// Orthonormal basis W of the dominant eigenspace of a symmetric PSD kernel:
/// eigenvectors whose eigenvalue exceeds tol times the largest. Computed once
/// per grid as a pre-computation for the projected gradient steps.
inline Matrix rkhs_projector(const Matrix& k, double tol) {
  if (k.rows() != k.cols()) throw ContractError("rkhs_projector: kernel must be square");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("rkhs_projector: tol must be in (0,1)");
  const std::size_t n = k.rows();
  double asym = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      asym = std::max(asym, std::fabs(k(i, j) - k(j, i)));
      scale = std::max(scale, std::fabs(k(i, j)));
    }
  }
  if (asym > 1e-10 * std::max(scale, 1.0))
    throw ContractError("rkhs_projector: kernel is not symmetric");

  const SymmetricEigen eig = jacobi_eigen_sym(k);
  const double cutoff = tol * std::max(eig.values.front(), 0.0);
  std::size_t r = 0;
  while (r < n && eig.values[r] > cutoff) ++r;
  if (r == 0) throw DomainError("rkhs_projector: no eigenvalue above the cutoff");

  Matrix w(n, r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) w(i, j) = eig.vectors(i, j);
  return w;
}

/// U' = W (W^T U): projection of the columns of U onto span(W). Idempotent;
/// O(n k r) via the two skinny products.
inline Matrix project_columns(const Matrix& w, const Matrix& u) {
  if (w.rows() != u.rows()) throw ContractError("project_columns: row mismatch");
  return matmul(w, matmul_at_b(w, u));
}

}  // namespace emglab
