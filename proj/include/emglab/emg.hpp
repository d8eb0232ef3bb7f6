#pragma once

#include <cmath>

#include "emglab/erfcx.hpp"
#include "emglab/errors.hpp"

namespace emglab {

inline constexpr double kMinScaleParam = 1e-12;  // floor for sigma and lambda

/// Location/scale/rate triple of the exponentially-modified Gaussian:
/// the law of Exp(lambda) + N(mu, sigma).
struct EmgParams {
  double mu = 0.0;
  double sigma = 1.0;
  double lambda = 1.0;

  EmgParams() = default;
  EmgParams(double mu_, double sigma_, double lambda_) : mu(mu_), sigma(sigma_), lambda(lambda_) {
    validate();
  }

  void validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(lambda))
      throw DomainError("EmgParams: non-finite parameter");
    if (sigma < kMinScaleParam || lambda < kMinScaleParam)
      throw DomainError("EmgParams: sigma and lambda must be >= 1e-12");
  }
};

/// Two-component residual mixture: Gaussian with probability 1-epsilon,
/// EMG with probability epsilon. The components share (mu, sigma).
struct MixtureParams {
  EmgParams emg{};
  double epsilon = 0.5;

  MixtureParams() = default;
  MixtureParams(EmgParams p, double eps) : emg(p), epsilon(eps) { validate(); }

  void validate() const {
    emg.validate();
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("MixtureParams: epsilon must be in [0,1]");
  }
};

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

inline double gauss_log_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -kLogSqrt2Pi - std::log(sigma) - 0.5 * z * z;
}

/// log EMG_{mu,sigma,lambda}(x), finite for all finite x.
///
/// Uses the erfcx rearrangement
///   log(lambda/2) - (x-mu)^2/(2 sigma^2) + log erfcx(u),
///   u = (mu + lambda sigma^2 - x) / (sqrt(2) sigma),
/// which is stable in the Gaussian tail (u > 0); for u <= 0 the direct
/// product form is used, where erfc(u) is in [1, 2) and the exponent is
/// bounded above by -lambda^2 sigma^2 / 2.
inline double emg_log_pdf(double x, const EmgParams& p) {
  p.validate();
  if (!std::isfinite(x)) throw DomainError("emg_log_pdf: non-finite x");
  const double d = x - p.mu;
  const double u = (p.lambda * p.sigma * p.sigma - d) / (M_SQRT2 * p.sigma);
  const double log_half_lambda = std::log(0.5 * p.lambda);
  if (u > 0.0) {
    const double z = d / p.sigma;
    return log_half_lambda - 0.5 * z * z + std::log(erfcx(u));
  }
  return log_half_lambda - p.lambda * d + 0.5 * p.lambda * p.lambda * p.sigma * p.sigma +
         std::log(std::erfc(u));
}

/// log of the one-parameter standard EMG density
///   EMG_alpha(x) = (alpha/2) exp(alpha(alpha/2 - x)) erfc((alpha - x)/sqrt(2)),
/// the mu = 0, sigma = 1 member of the location-scale family.
inline double std_emg_log_pdf(double x, double alpha) {
  if (!std::isfinite(x)) throw DomainError("std_emg_log_pdf: non-finite x");
  if (!std::isfinite(alpha) || alpha <= 0.0) throw DomainError("std_emg_log_pdf: alpha must be > 0");
  const double u = (alpha - x) / M_SQRT2;
  const double log_half_alpha = std::log(0.5 * alpha);
  if (u > 0.0) return log_half_alpha - 0.5 * x * x + std::log(erfcx(u));
  return log_half_alpha + alpha * (0.5 * alpha - x) + std::log(std::erfc(u));
}

/// log[(1-eps) N_{mu,sigma}(x) + eps EMG_{mu,sigma,lambda}(x)] by
/// log-sum-exp of the component log densities.
inline double emgm_log_pdf(double x, const MixtureParams& m) {
  m.validate();
  if (m.epsilon == 0.0) return gauss_log_pdf(x, m.emg.mu, m.emg.sigma);
  if (m.epsilon == 1.0) return emg_log_pdf(x, m.emg);
  const double a = std::log(m.epsilon) + emg_log_pdf(x, m.emg);
  const double b = std::log1p(-m.epsilon) + gauss_log_pdf(x, m.emg.mu, m.emg.sigma);
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

/// First and second partial derivatives of -log EMG_{mu,sigma,lambda}(x)
/// with respect to each of mu, sigma, lambda.
struct NegLogEmgPartials {
  double d_mu = 0, d2_mu = 0;
  double d_sigma = 0, d2_sigma = 0;
  double d_lambda = 0, d2_lambda = 0;
};

namespace detail {

// Q(u) = d/du log erfcx(u) and its derivative Qp(u) = d^2/du^2 log erfcx(u).
// Direct evaluation cancels catastrophically for large u, so past u = 30 the
// asymptotic expansions in v = 1/u^2 are used:
//   Q(u)  = -(1/u) (1 - v + 5/2 v^2 - 37/4 v^3 + 353/8 v^4 - ...)
//   Qp(u) =  v (1 - 3 v + 25/2 v^2 - 259/4 v^3 + ...)
// two_minus_qp = 2 - Qp is carried separately in the product form w(w - 2u),
// which stays strictly positive where 2 - Qp would round to zero.
struct LogErfcxDerivs {
  double q;             // g'(u)
  double qp;            // g''(u)
  double two_minus_qp;  // 2 - g''(u), exact to roundoff of the product
};

inline LogErfcxDerivs log_erfcx_derivs(double u) {
  if (u <= 30.0) {
    const double ex = erfcx(u);
    // 2/sqrt(pi) / erfcx(u); erfcx overflows to +inf below u ~ -26.6, in
    // which case w underflows to 0 and the exact limits q->2u, qp->2 emerge.
    const double w = std::isinf(ex) ? 0.0 : M_2_SQRTPI / ex;
    const double two_minus = w * (w - 2.0 * u);
    return {2.0 * u - w, 2.0 - two_minus, two_minus};
  }
  const double v = 1.0 / (u * u);
  const double q = -(1.0 / u) * (1.0 - v * (1.0 - v * (2.5 - v * (9.25 - 44.125 * v))));
  const double qp = v * (1.0 - v * (3.0 - v * (12.5 - 64.75 * v)));
  return {q, qp, 2.0 - qp};
}

}  // namespace detail

inline NegLogEmgPartials neg_log_emg_partials(double x, const EmgParams& p) {
  p.validate();
  if (!std::isfinite(x)) throw DomainError("neg_log_emg_partials: non-finite x");
  const double s = p.sigma, la = p.lambda;
  const double d = x - p.mu;
  const double u = (la * s * s - d) / (M_SQRT2 * s);
  const auto [q, qp, two_minus_qp] = detail::log_erfcx_derivs(u);

  NegLogEmgPartials out;
  const double s2 = s * s;
  out.d_mu = -d / s2 - q / (M_SQRT2 * s);
  out.d2_mu = two_minus_qp / (2.0 * s2);

  const double du_dsigma = la / M_SQRT2 + d / (M_SQRT2 * s2);
  out.d_sigma = -d * d / (s2 * s) - q * du_dsigma;
  out.d2_sigma = 3.0 * d * d / (s2 * s2) - qp * du_dsigma * du_dsigma + q * (M_SQRT2 * d / (s2 * s));

  out.d_lambda = -1.0 / la - q * s / M_SQRT2;
  out.d2_lambda = 1.0 / (la * la) - qp * s2 / 2.0;
  return out;
}

/// Matching partials of -log N_{mu,sigma}(x); lambda derivatives are zero.
struct NegLogGaussPartials {
  double d_mu = 0, d2_mu = 0;
  double d_sigma = 0, d2_sigma = 0;
};

inline NegLogGaussPartials neg_log_gauss_partials(double x, double mu, double sigma) {
  const double d = x - mu;
  const double s2 = sigma * sigma;
  NegLogGaussPartials out;
  out.d_mu = -d / s2;
  out.d2_mu = 1.0 / s2;
  out.d_sigma = 1.0 / sigma - d * d / (s2 * sigma);
  out.d2_sigma = -1.0 / s2 + 3.0 * d * d / (s2 * s2);
  return out;
}

}  // namespace emglab
