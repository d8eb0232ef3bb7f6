#pragma once

#include <cmath>
#include <cstddef>

#include "emglab/errors.hpp"
#include "emglab/numeric_util.hpp"

namespace emglab {

/// Armijo backtracking parameters.
struct LineSearchOptions {
  double shrink = 0.5;              // step multiplier per backtrack
  double sufficient_decrease = 1e-4;  // Armijo constant c
  int max_backtracks = 40;
};

struct DescentOptions {
  std::size_t max_iters = 20;
  double rel_tol = 1e-8;       // stop when relative objective decrease falls below
  double grad_tol = 0.0;       // stop when the gradient inf-norm falls below (0 = off)
  double curvature_floor = 1e-8;
  LineSearchOptions line_search{};

  void validate() const {
    if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0))
      throw DomainError("DescentOptions: shrink must be in (0,1)");
    if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0))
      throw DomainError("DescentOptions: sufficient_decrease must be in (0,1)");
    if (!(rel_tol > 0.0)) throw DomainError("DescentOptions: rel_tol must be positive");
    if (!(curvature_floor > 0.0)) throw DomainError("DescentOptions: curvature_floor must be positive");
  }
};

struct DescentResult {
  std::size_t iterations = 0;
  double initial_value = 0.0;
  double final_value = 0.0;
  double grad_inf_norm = 0.0;   // at the last evaluated point
  bool converged = false;       // tolerance met
  bool line_search_exhausted = false;  // no descent step found within max_backtracks
};

/// Gradient descent with per-coordinate curvature rescaling and Armijo
/// backtracking; never accepts an ascent step.
///
/// * value(x)            -> objective value
/// * derivs(x, g, c)     -> gradient g and per-coordinate second-derivative
///                          magnitude estimates c (sign is ignored here)
/// * project(x)          -> in-place map onto the feasible set
///
/// The step direction is -g / max(|c|, curvature_floor); with exact positive
/// curvature this is the Newton step per coordinate. When the line search
/// cannot find descent (e.g. at a kink), the current iterate is kept and the
/// result reports line_search_exhausted with the gradient norm, so callers
/// keep their monotonicity guarantee.
template <typename Value, typename Derivs, typename Project>
DescentResult scaled_descent(Vec& x, Value&& value, Derivs&& derivs, Project&& project,
                             const DescentOptions& opt) {
  opt.validate();
  const std::size_t dim = x.size();
  DescentResult res;
  double fx = value(x);
  res.initial_value = fx;
  res.final_value = fx;

  Vec grad(dim), curv(dim), cand(dim), step(dim);
  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    derivs(x, grad, curv);
    const double gnorm = norm_inf(grad);
    res.grad_inf_norm = gnorm;
    if (gnorm <= opt.grad_tol) {
      res.converged = true;
      break;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const double c = std::max(std::fabs(curv[j]), opt.curvature_floor);
      step[j] = -grad[j] / c;
    }

    double t = 1.0;
    bool accepted = false;
    double f_new = fx;
    for (int bt = 0; bt <= opt.line_search.max_backtracks; ++bt) {
      for (std::size_t j = 0; j < dim; ++j) cand[j] = x[j] + t * step[j];
      project(cand);
      double gdx = 0.0;  // directional derivative along the realized displacement
      for (std::size_t j = 0; j < dim; ++j) gdx += grad[j] * (cand[j] - x[j]);
      const double f_cand = value(cand);
      if (std::isfinite(f_cand) && f_cand <= fx + opt.line_search.sufficient_decrease * gdx &&
          gdx < 0.0) {
        x = cand;
        f_new = f_cand;
        accepted = true;
        break;
      }
      t *= opt.line_search.shrink;
    }
    res.iterations = it + 1;
    if (!accepted) {
      res.line_search_exhausted = true;
      break;
    }
    const double decrease = fx - f_new;
    fx = f_new;
    res.final_value = fx;
    if (decrease <= opt.rel_tol * std::max(1.0, std::fabs(fx))) {
      res.converged = true;
      break;
    }
  }
  res.final_value = fx;
  return res;
}

struct NoProjection {
  void operator()(Vec&) const {}
};

}  // namespace emglab
