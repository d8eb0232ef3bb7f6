#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "emglab/errors.hpp"
#include "emglab/numeric_util.hpp"

namespace emglab {

namespace detail {

// Orthonormal polynomial basis (degree 0..d) over the sample points, built
// from Chebyshev columns on the mapped interval by modified Gram-Schmidt.
// The basis depends only on n and d, so repeated fits are O(n d).
inline std::vector<Vec> poly_basis(std::size_t n, std::size_t degree) {
  std::vector<Vec> cols(degree + 1, Vec(n));
  Vec t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = n > 1 ? -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = 1.0;
    if (degree >= 1) cols[1][i] = t[i];
  }
  for (std::size_t k = 2; k <= degree; ++k)
    for (std::size_t i = 0; i < n; ++i) cols[k][i] = 2.0 * t[i] * cols[k - 1][i] - cols[k - 2][i];

  for (std::size_t k = 0; k <= degree; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      const double proj = dot(cols[k], cols[j]);
      for (std::size_t i = 0; i < n; ++i) cols[k][i] -= proj * cols[j][i];
    }
    const double nrm = norm2(cols[k]);
    if (nrm <= 1e-14) throw ContractError("poly_basis: degenerate basis (degree too high)");
    for (double& v : cols[k]) v /= nrm;
  }
  return cols;
}

inline Vec poly_fit(const std::vector<Vec>& basis, const Vec& y) {
  Vec fit(y.size(), 0.0);
  for (const Vec& q : basis) {
    const double c = dot(q, y);
    for (std::size_t i = 0; i < y.size(); ++i) fit[i] += c * q[i];
  }
  return fit;
}

}  // namespace detail

/// Iterative low-order polynomial background estimation: fit, estimate the
/// noise level from the residuals below the fit, clip points above
/// fit + noise level, and repeat until the noise estimate stabilizes.
inline Vec imodpoly(const Vec& y, std::size_t degree, std::size_t max_iter = 100) {
  const std::size_t n = y.size();
  if (degree >= n) throw ContractError("imodpoly: degree must be below the point count");
  if (!all_finite(y)) throw DomainError("imodpoly: non-finite input");

  const std::vector<Vec> basis = detail::poly_basis(n, degree);
  Vec work = y;
  Vec fit = detail::poly_fit(basis, work);
  double noise_prev = -1.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    Vec below;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = work[i] - fit[i];
      if (r < 0.0) below.push_back(r);
    }
    double noise = 0.0;
    if (below.size() >= 2) {
      noise = sample_std(below);
    } else if (!below.empty()) {
      noise = std::fabs(below[0]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double cap = fit[i] + noise;
      if (work[i] > cap) work[i] = cap;
    }
    fit = detail::poly_fit(basis, work);
    if (noise_prev >= 0.0 &&
        std::fabs(noise - noise_prev) <= 1e-6 * std::max(noise_prev, 1e-30))
      break;
    noise_prev = noise;
  }
  return fit;
}

}  // namespace emglab
