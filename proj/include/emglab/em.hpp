#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "emglab/descent.hpp"
#include "emglab/emg.hpp"
#include "emglab/errors.hpp"
#include "emglab/model.hpp"
#include "emglab/numeric_util.hpp"

namespace emglab {

/// Posterior peak probabilities gamma_i from the E-step.
struct Responsibilities {
  Vec gamma;
};

struct FitOptions {
  std::size_t max_em_iters = 500;
  std::size_t max_inner_iters = 20;   // descent steps per M-step phase
  double loglik_rel_tol = 1e-8;
  LineSearchOptions line_search{};
  double sigma_prior_scale = 0.0;     // half-Normal prior on sigma; 0 disables
  double curvature_floor = 1e-8;

  void validate() const {
    if (max_em_iters == 0 || max_inner_iters == 0) throw DomainError("FitOptions: iteration caps must be positive");
    if (!(loglik_rel_tol > 0.0)) throw DomainError("FitOptions: loglik_rel_tol must be positive");
    if (!(sigma_prior_scale >= 0.0)) throw DomainError("FitOptions: sigma_prior_scale must be >= 0");
    if (!(curvature_floor > 0.0)) throw DomainError("FitOptions: curvature_floor must be positive");
    DescentOptions probe;
    probe.line_search = line_search;
    probe.validate();
  }

  DescentOptions descent() const {
    DescentOptions d;
    d.max_iters = max_inner_iters;
    d.rel_tol = loglik_rel_tol;
    d.curvature_floor = curvature_floor;
    d.line_search = line_search;
    return d;
  }
};

enum class TraceKind { LogLikelihood, Objective };

struct FitResult {
  Vec theta;
  MixtureParams mix{};
  Responsibilities gamma;
  Vec trace;                 // observed log-likelihood (EMGM) or loss objective per iteration
  TraceKind trace_kind = TraceKind::LogLikelihood;
  std::size_t iterations = 0;
  bool converged = false;
  bool line_search_exhausted = false;
  double final_grad_norm = 0.0;
};

/// log density of the half-Normal prior sigma ~ N+(0, scale).
inline double half_normal_log_pdf(double sigma, double scale) {
  const double z = sigma / scale;
  return 0.5 * std::log(2.0 / M_PI) - std::log(scale) - 0.5 * z * z;
}

namespace detail {

inline void check_lengths(std::size_t a, std::size_t b, const char* where) {
  if (a != b) throw ContractError(std::string(where) + ": length mismatch");
}

}  // namespace detail

/// E-step: gamma_i = eps EMG(D_i) / [(1-eps) N(D_i) + eps EMG(D_i)], all
/// densities located at M_i; computed in log space.
inline Responsibilities e_step(const Vec& data, const Vec& preds, const MixtureParams& mix) {
  detail::check_lengths(data.size(), preds.size(), "e_step");
  mix.validate();
  Responsibilities r;
  r.gamma.resize(data.size());
  if (mix.epsilon == 0.0) {
    r.gamma.assign(data.size(), 0.0);
    return r;
  }
  if (mix.epsilon == 1.0) {
    r.gamma.assign(data.size(), 1.0);
    return r;
  }
  const double log_eps = std::log(mix.epsilon);
  const double log_1meps = std::log1p(-mix.epsilon);
  EmgParams comp = mix.emg;
  for (std::size_t i = 0; i < data.size(); ++i) {
    comp.mu = mix.emg.mu + preds[i];
    const double a = log_eps + emg_log_pdf(data[i], comp);
    const double b = log_1meps + gauss_log_pdf(data[i], comp.mu, comp.sigma);
    r.gamma[i] = 1.0 / (1.0 + std::exp(b - a));
  }
  return r;
}

/// Expected complete-data log-likelihood
///   sum_i (1-g_i) log N_{M_i,sigma}(D_i) + g_i log EMG_{M_i,sigma,lambda}(D_i),
/// plus the half-Normal log prior on sigma when enabled.
inline double expected_loglik(const Vec& data, const Vec& preds, const Responsibilities& resp,
                              const MixtureParams& mix, double sigma_prior_scale = 0.0) {
  detail::check_lengths(data.size(), preds.size(), "expected_loglik");
  detail::check_lengths(data.size(), resp.gamma.size(), "expected_loglik");
  mix.validate();
  EmgParams comp = mix.emg;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    comp.mu = mix.emg.mu + preds[i];
    const double g = resp.gamma[i];
    double term = 0.0;
    if (g < 1.0) term += (1.0 - g) * gauss_log_pdf(data[i], comp.mu, comp.sigma);
    if (g > 0.0) term += g * emg_log_pdf(data[i], comp);
    total += term;
  }
  if (sigma_prior_scale > 0.0) total += half_normal_log_pdf(mix.emg.sigma, sigma_prior_scale);
  return total;
}

/// Observed-data log-likelihood sum_i log EMGM(D_i); the EM monotonicity
/// witness (with the log prior added when one is in force, so the traced
/// quantity is exactly what GEM improves).
inline double observed_loglik(const Vec& data, const Vec& preds, const MixtureParams& mix) {
  detail::check_lengths(data.size(), preds.size(), "observed_loglik");
  mix.validate();
  MixtureParams shifted = mix;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    shifted.emg.mu = mix.emg.mu + preds[i];
    total += emgm_log_pdf(data[i], shifted);
  }
  return total;
}

namespace detail {

// Negated expected log-likelihood as a function of theta, with per-datum
// location weights for gradient/curvature accumulation.
struct ThetaObjective {
  const Vec& data;
  const ModelAdapter& adapter;
  const MixtureParams& mix;
  const Responsibilities& resp;
  mutable Vec preds;

  double value(const Vec& theta) const {
    adapter.predict(theta, preds);
    EmgParams comp = mix.emg;
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      comp.mu = mix.emg.mu + preds[i];
      const double g = resp.gamma[i];
      double term = 0.0;
      if (g < 1.0) term += (1.0 - g) * gauss_log_pdf(data[i], comp.mu, comp.sigma);
      if (g > 0.0) term += g * emg_log_pdf(data[i], comp);
      total += term;
    }
    return -total;
  }

  // w1_i = d(-E loglik)/dM_i, w2_i = d^2(-E loglik)/dM_i^2 (positive).
  void location_weights(const Vec& theta, Vec& w1, Vec& w2) const {
    adapter.predict(theta, preds);
    const std::size_t n = data.size();
    w1.resize(n);
    w2.resize(n);
    EmgParams comp = mix.emg;
    for (std::size_t i = 0; i < n; ++i) {
      comp.mu = mix.emg.mu + preds[i];
      const double g = resp.gamma[i];
      double a1 = 0.0, a2 = 0.0;
      if (g < 1.0) {
        const auto gp = neg_log_gauss_partials(data[i], comp.mu, comp.sigma);
        a1 += (1.0 - g) * gp.d_mu;
        a2 += (1.0 - g) * gp.d2_mu;
      }
      if (g > 0.0) {
        const auto ep = neg_log_emg_partials(data[i], comp);
        a1 += g * ep.d_mu;
        a2 += g * ep.d2_mu;
      }
      w1[i] = a1;
      w2[i] = a2;
    }
  }
};

// Negated expected log-likelihood over (log sigma, log lambda) at fixed
// predictions, including the sigma prior when enabled.
struct ScaleObjective {
  const Vec& data;
  const Vec& preds;
  const Responsibilities& resp;
  const MixtureParams& mix;  // supplies mu offset only
  double sigma_prior_scale;

  static constexpr double kLogLo = -27.0;  // keeps sigma, lambda within [~2e-12, ~5e11]
  static constexpr double kLogHi = 27.0;

  double value(const Vec& p) const {
    MixtureParams m = mix;
    m.emg.sigma = std::exp(p[0]);
    m.emg.lambda = std::exp(p[1]);
    return -expected_loglik(data, preds, resp, m, sigma_prior_scale);
  }

  void derivs(const Vec& p, Vec& grad, Vec& curv) const {
    const double sigma = std::exp(p[0]);
    const double lambda = std::exp(p[1]);
    EmgParams comp{mix.emg.mu, sigma, lambda};
    double gs = 0.0, gl = 0.0, hs = 0.0, hl = 0.0;  // d/dsigma, d/dlambda, second derivs
    for (std::size_t i = 0; i < data.size(); ++i) {
      comp.mu = mix.emg.mu + preds[i];
      const double g = resp.gamma[i];
      if (g < 1.0) {
        const auto gp = neg_log_gauss_partials(data[i], comp.mu, sigma);
        gs += (1.0 - g) * gp.d_sigma;
        hs += (1.0 - g) * gp.d2_sigma;
      }
      if (g > 0.0) {
        const auto ep = neg_log_emg_partials(data[i], comp);
        gs += g * ep.d_sigma;
        hs += g * ep.d2_sigma;
        gl += g * ep.d_lambda;
        hl += g * ep.d2_lambda;
      }
    }
    if (sigma_prior_scale > 0.0) {
      // -log half-normal contributes sigma/scale^2 and 1/scale^2.
      gs += sigma / (sigma_prior_scale * sigma_prior_scale);
      hs += 1.0 / (sigma_prior_scale * sigma_prior_scale);
    }
    grad.resize(2);
    curv.resize(2);
    grad[0] = gs * sigma;
    grad[1] = gl * lambda;
    curv[0] = hs * sigma * sigma + gs * sigma;
    curv[1] = hl * lambda * lambda + gl * lambda;
  }

  static void clamp(Vec& p) {
    for (double& v : p) v = std::min(std::max(v, kLogLo), kLogHi);
  }
};

}  // namespace detail

/// One M-step: phase 1 improves theta block-by-block with (sigma, lambda)
/// fixed; phase 2 improves (sigma, lambda) in log space with theta fixed;
/// finally epsilon is set to mean(gamma). Never decreases the expected
/// log-likelihood.
inline DescentResult m_step(const Vec& data, const ModelAdapter& adapter, Vec& theta,
                            MixtureParams& mix, const Responsibilities& resp,
                            const FitOptions& opts) {
  opts.validate();
  detail::check_lengths(data.size(), adapter.data_size(), "m_step");
  detail::check_lengths(data.size(), resp.gamma.size(), "m_step");
  const DescentOptions dopt = opts.descent();
  DescentResult last;

  // Phase 1: model parameters.
  detail::ThetaObjective tobj{data, adapter, mix, resp, {}};
  for (std::size_t b = 0; b < adapter.block_count(); ++b) {
    adapter.prepare_block(theta, b);
    const auto [off, len] = adapter.block_span(b);
    Vec w1, w2;
    auto value = [&](const Vec& xb) {
      Vec full = theta;
      for (std::size_t j = 0; j < len; ++j) full[off + j] = xb[j];
      return tobj.value(full);
    };
    auto derivs = [&](const Vec& xb, Vec& g, Vec& c) {
      Vec full = theta;
      for (std::size_t j = 0; j < len; ++j) full[off + j] = xb[j];
      tobj.location_weights(full, w1, w2);
      g.assign(len, 0.0);
      c.assign(len, 0.0);
      adapter.grad_accumulate(full, w1, b, g);
      adapter.curvature_accumulate(full, w2, b, c);
    };
    auto project = [&](Vec& xb) {
      Vec full = theta;
      for (std::size_t j = 0; j < len; ++j) full[off + j] = xb[j];
      adapter.project(full, b);
      for (std::size_t j = 0; j < len; ++j) xb[j] = full[off + j];
    };
    Vec xb(len);
    for (std::size_t j = 0; j < len; ++j) xb[j] = theta[off + j];
    last = scaled_descent(xb, value, derivs, project, dopt);
    for (std::size_t j = 0; j < len; ++j) theta[off + j] = xb[j];
  }

  // Phase 2: (sigma, lambda) in log space at the updated predictions.
  Vec preds;
  adapter.predict(theta, preds);
  detail::ScaleObjective sobj{data, preds, resp, mix, opts.sigma_prior_scale};
  Vec p{std::log(mix.emg.sigma), std::log(mix.emg.lambda)};
  last = scaled_descent(
      p, [&](const Vec& q) { return sobj.value(q); },
      [&](const Vec& q, Vec& g, Vec& c) { sobj.derivs(q, g, c); },
      [&](Vec& q) { detail::ScaleObjective::clamp(q); }, dopt);
  mix.emg.sigma = std::exp(p[0]);
  mix.emg.lambda = std::exp(p[1]);

  // Closed-form epsilon update: the mixture MLE given gamma.
  mix.epsilon = data.empty() ? mix.epsilon : mean(resp.gamma);
  return last;
}

/// Generalized EM driver: alternates e_step and m_step until the observed
/// log-likelihood (plus log prior, when enabled) changes by less than
/// loglik_rel_tol in relative terms, or max_em_iters is reached.
inline FitResult fit_emgm(const Vec& data, const ModelAdapter& adapter, Vec theta_init,
                          MixtureParams mix_init, const FitOptions& opts) {
  opts.validate();
  detail::check_lengths(data.size(), adapter.data_size(), "fit_emgm");
  detail::check_lengths(theta_init.size(), adapter.param_size(), "fit_emgm");
  if (!all_finite(data)) throw FitError("fit_emgm: non-finite data");

  FitResult out;
  out.theta = std::move(theta_init);
  out.mix = mix_init;
  out.trace_kind = TraceKind::LogLikelihood;

  Vec preds;
  adapter.predict(out.theta, preds);
  auto traced = [&]() {
    double v = observed_loglik(data, preds, out.mix);
    if (opts.sigma_prior_scale > 0.0)
      v += half_normal_log_pdf(out.mix.emg.sigma, opts.sigma_prior_scale);
    return v;
  };
  double current = traced();
  if (!std::isfinite(current)) throw FitError("fit_emgm: non-finite log-likelihood at init");
  out.trace.push_back(current);

  for (std::size_t it = 0; it < opts.max_em_iters; ++it) {
    out.gamma = e_step(data, preds, out.mix);
    const DescentResult step = m_step(data, adapter, out.theta, out.mix, out.gamma, opts);
    out.line_search_exhausted = step.line_search_exhausted;
    out.final_grad_norm = step.grad_inf_norm;
    adapter.predict(out.theta, preds);
    const double next = traced();
    out.trace.push_back(next);
    out.iterations = it + 1;
    const double change = next - current;
    current = next;
    if (std::fabs(change) <= opts.loglik_rel_tol * std::max(1.0, std::fabs(next))) {
      out.converged = true;
      break;
    }
  }
  if (out.gamma.gamma.empty()) out.gamma = e_step(data, preds, out.mix);
  return out;
}

}  // namespace emglab
