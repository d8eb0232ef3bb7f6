#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "emglab/descent.hpp"
#include "emglab/em.hpp"
#include "emglab/errors.hpp"
#include "emglab/model.hpp"
#include "emglab/numeric_util.hpp"

namespace emglab {

/// Residual objectives for the comparison fits.
struct LossKind {
  enum class Tag { L2, L1, Huber, Pinball } tag = Tag::L2;
  double param = 0.0;  // Huber delta or pinball q

  static LossKind l2() { return {Tag::L2, 0.0}; }
  static LossKind l1() { return {Tag::L1, 0.0}; }
  static LossKind huber(double delta) {
    if (!(delta > 0.0)) throw DomainError("LossKind: Huber delta must be > 0");
    return {Tag::Huber, delta};
  }
  static LossKind pinball(double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("LossKind: pinball q must be in (0,1)");
    return {Tag::Pinball, q};
  }

  std::string name() const {
    char buf[40];
    switch (tag) {
      case Tag::L2: return "l2";
      case Tag::L1: return "l1";
      case Tag::Huber:
        std::snprintf(buf, sizeof(buf), "huber(%g)", param);
        return buf;
      case Tag::Pinball:
        std::snprintf(buf, sizeof(buf), "pinball(%g)", param);
        return buf;
    }
    return "?";
  }
};

struct LossEval {
  double value = 0.0;      // exact loss
  double subgradient = 0.0;  // 0 at exact kinks
  double curvature = 0.0;  // positive majorizer curvature for scaled steps
};

/// Pointwise loss value, subgradient, and a positive curvature surrogate.
///
/// The surrogate is the curvature of the standard quadratic majorizer of
/// each loss at the current residual (IRLS weight), floored at kink
/// half-width eta; it makes the rescaled step a sensible Newton-like step
/// even for the piecewise-linear losses.
inline LossEval loss_eval(const LossKind& kind, double r, double eta = 1e-9) {
  LossEval e;
  const double ar = std::fabs(r);
  switch (kind.tag) {
    case LossKind::Tag::L2:
      e.value = 0.5 * r * r;
      e.subgradient = r;
      e.curvature = 1.0;
      break;
    case LossKind::Tag::L1:
      e.value = ar;
      e.subgradient = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      e.curvature = 1.0 / std::max(ar, eta);
      break;
    case LossKind::Tag::Huber: {
      const double delta = kind.param;
      if (ar <= delta) {
        e.value = 0.5 * r * r;
        e.subgradient = r;
        e.curvature = 1.0;
      } else {
        e.value = delta * (ar - 0.5 * delta);
        e.subgradient = r > 0.0 ? delta : -delta;
        e.curvature = delta / ar;
      }
      break;
    }
    case LossKind::Tag::Pinball: {
      const double q = kind.param;
      e.value = r >= 0.0 ? q * r : (q - 1.0) * r;
      e.subgradient = r > 0.0 ? q : (r < 0.0 ? q - 1.0 : 0.0);
      e.curvature = 0.5 / std::max(ar, eta);
      break;
    }
  }
  return e;
}

namespace detail {

// Kink-smoothed gradient used only to pick descent directions; objective
// values and Armijo acceptance use the exact definitions.
inline double loss_grad_smoothed(const LossKind& kind, double r, double eta) {
  switch (kind.tag) {
    case LossKind::Tag::L2:
      return r;
    case LossKind::Tag::L1:
      return std::fabs(r) <= eta ? r / eta : (r > 0.0 ? 1.0 : -1.0);
    case LossKind::Tag::Huber: {
      const double delta = kind.param;
      return std::fabs(r) <= delta ? r : (r > 0.0 ? delta : -delta);
    }
    case LossKind::Tag::Pinball: {
      const double q = kind.param;
      const double dabs = std::fabs(r) <= eta ? r / eta : (r > 0.0 ? 1.0 : -1.0);
      return 0.5 * dabs + (q - 0.5);
    }
  }
  return 0.0;
}

}  // namespace detail

/// Minimizes sum_i loss(D_i - M_i(theta)) by block-alternating scaled
/// descent with projection. The trace holds the exact (non-smoothed)
/// objective per outer iteration and is non-increasing.
inline FitResult fit_loss(const Vec& data, const ModelAdapter& adapter, const LossKind& kind,
                          Vec theta_init, const FitOptions& opts) {
  opts.validate();
  detail::check_lengths(data.size(), adapter.data_size(), "fit_loss");
  detail::check_lengths(theta_init.size(), adapter.param_size(), "fit_loss");
  if (!all_finite(data)) throw FitError("fit_loss: non-finite data");

  double scale = 1.0;
  for (double v : data) scale = std::max(scale, std::fabs(v));
  const double eta = 1e-6 * scale;

  FitResult out;
  out.theta = std::move(theta_init);
  out.trace_kind = TraceKind::Objective;
  const DescentOptions dopt = opts.descent();

  Vec preds;
  auto objective_at = [&](const Vec& theta) {
    adapter.predict(theta, preds);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
      total += loss_eval(kind, data[i] - preds[i]).value;
    return total;
  };

  double current = objective_at(out.theta);
  out.trace.push_back(current);

  Vec w1, w2;
  for (std::size_t it = 0; it < opts.max_em_iters; ++it) {
    bool exhausted_all = true;
    for (std::size_t b = 0; b < adapter.block_count(); ++b) {
      adapter.prepare_block(out.theta, b);
      const auto [off, len] = adapter.block_span(b);
      auto value = [&](const Vec& xb) {
        Vec full = out.theta;
        for (std::size_t j = 0; j < len; ++j) full[off + j] = xb[j];
        return objective_at(full);
      };
      auto derivs = [&](const Vec& xb, Vec& g, Vec& c) {
        Vec full = out.theta;
        for (std::size_t j = 0; j < len; ++j) full[off + j] = xb[j];
        adapter.predict(full, preds);
        const std::size_t n = data.size();
        w1.resize(n);
        w2.resize(n);
        double mean_abs = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_abs += std::fabs(data[i] - preds[i]);
        mean_abs /= static_cast<double>(n);
        // Kink floor tied to the residual scale, so a few near-zero residuals
        // cannot spike the curvature and freeze the step.
        const double eta_dyn = std::max(eta, 0.05 * mean_abs);
        for (std::size_t i = 0; i < n; ++i) {
          const double r = data[i] - preds[i];
          w1[i] = -detail::loss_grad_smoothed(kind, r, eta);  // d/dM = -d/dr
          w2[i] = loss_eval(kind, r, eta_dyn).curvature;
        }
        g.assign(len, 0.0);
        c.assign(len, 0.0);
        adapter.grad_accumulate(full, w1, b, g);
        adapter.curvature_accumulate(full, w2, b, c);
      };
      auto project = [&](Vec& xb) {
        Vec full = out.theta;
        for (std::size_t j = 0; j < len; ++j) full[off + j] = xb[j];
        adapter.project(full, b);
        for (std::size_t j = 0; j < len; ++j) xb[j] = full[off + j];
      };
      Vec xb(len);
      for (std::size_t j = 0; j < len; ++j) xb[j] = out.theta[off + j];
      const DescentResult r = scaled_descent(xb, value, derivs, project, dopt);
      for (std::size_t j = 0; j < len; ++j) out.theta[off + j] = xb[j];
      out.final_grad_norm = r.grad_inf_norm;
      if (!(r.line_search_exhausted && r.iterations == 1)) exhausted_all = false;
    }
    // Armijo ran on the exact objective, so the trace is monotone by
    // construction.
    const double next = objective_at(out.theta);
    out.iterations = it + 1;
    out.trace.push_back(next);
    const double change = current - next;
    current = next;
    if (change <= opts.loglik_rel_tol * std::max(1.0, std::fabs(next))) {
      out.converged = true;
      break;
    }
    if (exhausted_all) {
      out.line_search_exhausted = true;
      break;
    }
  }
  return out;
}

}  // namespace emglab
