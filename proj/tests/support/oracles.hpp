#pragma once

// Independent numerical oracles for the test suite. Everything here is
// deliberately slow and simple, and must not share code paths with the
// library implementations it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature in long double.

namespace detail {

template <typename F>
long double simpson_slice(const F& f, long double a, long double b, long double fa, long double fm,
                          long double fb) {
  return (b - a) / 6.0L * (fa + 4.0L * fm + fb);
}

template <typename F>
long double adaptive_simpson_rec(const F& f, long double a, long double b, long double fa,
                                 long double fm, long double fb, long double whole,
                                 long double tol, int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m), rm = 0.5L * (m + b);
  const long double flm = f(lm), frm = f(rm);
  const long double left = simpson_slice(f, a, m, fa, flm, fm);
  const long double right = simpson_slice(f, m, b, fm, frm, fb);
  const long double delta = left + right - whole;
  // The roundoff floor keeps the recursion finite once delta is pure noise.
  const long double floor_tol = 5e-19L * (fabsl(left) + fabsl(right));
  if (depth <= 0 || fabsl(delta) <= 15.0L * std::max(tol, floor_tol))
    return left + right + delta / 15.0L;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5L * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5L * tol, depth - 1);
}

}  // namespace detail

template <typename F>
long double integrate(const F& f, long double a, long double b, long double tol = 1e-16L,
                      int depth = 40) {
  const long double m = 0.5L * (a + b);
  const long double fa = f(a), fm = f(m), fb = f(b);
  const long double whole = detail::simpson_slice(f, a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// ---------------------------------------------------------------------------
// erfcx oracle: Taylor series near zero, the integral representation
//   erfcx(t) = 2/sqrt(pi) * integral_0^inf exp(-s^2 - 2 t s) ds
// elsewhere, all in long double.

inline long double erfcx_series(long double t) {
  // erf(t) Maclaurin series, then exp(t^2)(1 - erf(t)).
  long double term = t;
  long double sum = t;
  for (int n = 1; n < 200; ++n) {
    term *= -t * t / static_cast<long double>(n);
    const long double add = term / static_cast<long double>(2 * n + 1);
    sum += add;
    if (fabsl(add) < 1e-22L * fabsl(sum)) break;
  }
  const long double erf_t = 1.1283791670955125738961589031215L * sum;  // 2/sqrt(pi) * sum
  return expl(t * t) * (1.0L - erf_t);
}

inline long double erfcx_reference(long double t) {
  if (fabsl(t) <= 1.0L) return erfcx_series(t);
  if (t > 0.0L) {
    auto f = [&](long double s) { return expl(-s * s - 2.0L * t * s); };
    const long double hi = -t + sqrtl(t * t + 90.0L);  // exponent reaches -90
    return 1.1283791670955125738961589031215L * integrate(f, 0.0L, hi, 1e-21L);
  }
  // Negative t: integrand peaks at s = -t with value exp(t^2); factor it out.
  const long double p = -t;
  auto f = [&](long double s) {
    const long double d = s - p;
    return expl(-d * d);  // = exp(-s^2 - 2ts - t^2)
  };
  const long double hi = p + 10.0L;
  const long double integral = integrate(f, 0.0L, hi, 1e-21L);
  return 1.1283791670955125738961589031215L * expl(p * p) * integral;
}

// ---------------------------------------------------------------------------
// EMG density by direct convolution of Exp(lambda) and N(mu, sigma).

inline long double emg_pdf_convolution(long double x, long double mu, long double sigma,
                                       long double lambda) {
  const long double inv_norm = 0.3989422804014326779399460599344L / sigma;  // 1/(sigma sqrt(2 pi))
  auto integrand = [&](long double s) {
    const long double z = (x - s - mu) / sigma;
    return lambda * expl(-lambda * s) * inv_norm * expl(-0.5L * z * z);
  };
  long double hi = 50.0L / lambda;
  const long double gauss_center = x - mu;  // the Gaussian factor peaks here
  if (gauss_center + 14.0L * sigma > 0.0L) hi = std::max(hi, gauss_center + 14.0L * sigma);
  // Knots bracketing the (possibly narrow) Gaussian spike, so the adaptive
  // rule cannot step over it.
  std::vector<long double> knots{0.0L};
  for (long double k : {gauss_center - 10.0L * sigma, gauss_center - 2.0L * sigma, gauss_center,
                        gauss_center + 2.0L * sigma, gauss_center + 10.0L * sigma})
    if (k > 0.0L && k < hi) knots.push_back(k);
  knots.push_back(hi);
  std::sort(knots.begin(), knots.end());
  long double total = 0.0L;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    total += integrate(integrand, knots[i], knots[i + 1], 1e-24L);
  return total;
}

inline long double emg_cdf_quadrature(long double x, long double mu, long double sigma,
                                      long double lambda) {
  // CDF of Exp+Normal: P(E + G <= x) = E_E[Phi((x - s - mu)/sigma)].
  auto integrand = [&](long double s) {
    const long double z = (x - s - mu) / (sigma * 1.4142135623730950488L);
    return lambda * expl(-lambda * s) * 0.5L * erfcl(-z);
  };
  const long double hi = 50.0L / lambda + std::max(0.0L, (x - mu) + 12.0L * sigma);
  return integrate(integrand, 0.0L, hi, 1e-14L);
}

// ---------------------------------------------------------------------------
// Golden-section search for a 1-D unimodal minimum.

inline double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                 double tol = 1e-12, int max_iter = 400) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Central finite differences.

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double central_diff2(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov distance between a sorted sample and a CDF evaluated at
// the sample points.

inline double ks_distance(const std::vector<double>& sorted_sample,
                          const std::function<double(double)>& cdf) {
  const std::size_t n = sorted_sample.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double F = cdf(sorted_sample[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(std::fabs(F - lo), std::fabs(hi - F)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Classical Gram-Schmidt orthonormal projection oracle: project y onto the
// span of the given basis columns.

inline std::vector<double> gram_schmidt_project(const std::vector<std::vector<double>>& basis,
                                                const std::vector<double>& y) {
  std::vector<std::vector<double>> q;
  for (auto col : basis) {
    for (const auto& prev : q) {
      double dp = 0.0;
      for (std::size_t i = 0; i < col.size(); ++i) dp += prev[i] * col[i];
      for (std::size_t i = 0; i < col.size(); ++i) col[i] -= dp * prev[i];
    }
    double nrm = 0.0;
    for (double v : col) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm > 1e-12) {
      for (double& v : col) v /= nrm;
      q.push_back(col);
    }
  }
  std::vector<double> out(y.size(), 0.0);
  for (const auto& prev : q) {
    double dp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dp += prev[i] * y[i];
    for (std::size_t i = 0; i < y.size(); ++i) out[i] += dp * prev[i];
  }
  return out;
}

}  // namespace oracles
