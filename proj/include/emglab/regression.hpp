#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "emglab/em.hpp"
#include "emglab/errors.hpp"
#include "emglab/losses.hpp"
#include "emglab/model.hpp"
#include "emglab/numeric_util.hpp"
#include "emglab/pmf.hpp"
#include "emglab/sampling.hpp"

namespace emglab {

inline constexpr double kTrueSlope = M_PI / 2.0;
inline constexpr double kTrueIntercept = M_E;

/// Contaminated-line data model: y = (pi/2) x + e + G + 1_C * C with
/// G ~ N(0, 1/2) and C drawn from a positive-support contaminant.
struct RegressionConfig {
  enum class Contamination { None, Exponential, LogNormal };

  std::size_t n = 256;
  Contamination contamination = Contamination::Exponential;
  double rate = 0.5;        // exponential contaminant rate
  double ln_mu = 0.0;       // log-normal contaminant parameters
  double ln_sigma = 1.0;
  double contaminated_fraction = 0.25;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) throw DomainError("RegressionConfig: n must be >= 2");
    if (!(contaminated_fraction >= 0.0 && contaminated_fraction <= 1.0))
      throw DomainError("RegressionConfig: contaminated_fraction must be in [0,1]");
    if (!(noise_sigma >= 0.0)) throw DomainError("RegressionConfig: noise_sigma must be >= 0");
    if (contamination == Contamination::Exponential && !(rate > 0.0))
      throw DomainError("RegressionConfig: rate must be > 0");
    if (contamination == Contamination::LogNormal && !(ln_sigma > 0.0))
      throw DomainError("RegressionConfig: ln_sigma must be > 0");
  }
};

struct RegressionData {
  Vec x, y;
  std::vector<std::uint8_t> contaminated;
};

/// Deterministic dataset draw: x ~ U(0,1), exactly floor(frac*n) indices
/// contaminated, chosen uniformly without replacement.
inline RegressionData gen_regression(const RegressionConfig& cfg) {
  cfg.validate();
  SeededRng rng(cfg.seed);
  const std::size_t n = cfg.n;
  RegressionData d;
  d.x.resize(n);
  d.y.resize(n);
  d.contaminated.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) d.x[i] = rng.uniform();

  const std::size_t n_cont =
      cfg.contamination == RegressionConfig::Contamination::None
          ? 0
          : static_cast<std::size_t>(cfg.contaminated_fraction * static_cast<double>(n));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < n_cont; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(idx[i], idx[j]);
    d.contaminated[idx[i]] = 1;
  }

  for (std::size_t i = 0; i < n; ++i) {
    double yi = kTrueSlope * d.x[i] + kTrueIntercept + rng.normal(0.0, cfg.noise_sigma);
    if (d.contaminated[i]) {
      yi += cfg.contamination == RegressionConfig::Contamination::Exponential
                ? rng.exponential(cfg.rate)
                : rng.lognormal(cfg.ln_mu, cfg.ln_sigma);
    }
    d.y[i] = yi;
  }
  return d;
}

struct LineFit {
  double a = 0.0;
  double b = 0.0;
  FitResult fit;
};

/// Line fit under any of the comparison objectives. Coefficients start at
/// a = 1, b = 0; the EMGM path starts from mu = 0, sigma = 1, lambda = 1,
/// epsilon = 1/2 with the model carrying the location.
inline LineFit fit_line(const Vec& x, const Vec& y, const FitMethod& method, const FitOptions& opts) {
  if (x.size() != y.size()) throw ContractError("fit_line: length mismatch");
  if (x.size() < 2) throw ContractError("fit_line: need at least two points");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) throw FitError("fit_line: degenerate x (zero variance)");

  LineAdapter adapter{x};
  Vec theta{1.0, 0.0};
  LineFit out;
  if (method.is_emgm()) {
    const MixtureParams mix0{EmgParams{0.0, 1.0, 1.0}, 0.5};
    out.fit = fit_emgm(y, adapter, theta, mix0, opts);
  } else {
    out.fit = fit_loss(y, adapter, method.loss, theta, opts);
  }
  out.a = out.fit.theta[0];
  out.b = out.fit.theta[1];
  return out;
}

/// Per-method error statistics over repeated realizations. Errors follow
/// the truth-minus-estimate convention, so positive contamination drives
/// the l2 intercept error negative.
struct TrialStats {
  double mae_a = 0, mean_a = 0, std_a = 0;
  double mae_b = 0, mean_b = 0, std_b = 0;
};

struct TrialRecord {
  std::size_t size = 0;
  std::size_t rep = 0;
  std::string method;
  double err_a = 0, err_b = 0;
};

struct TrialTable {
  std::vector<std::size_t> sizes;
  std::vector<std::string> methods;
  // stats[size_index][method_index]
  std::vector<std::vector<TrialStats>> stats;
  std::vector<TrialRecord> records;
};

/// reps independent realizations per data size; each realization is fitted
/// by every method. Seeds derive from the master seed and the trial index,
/// and aggregation is indexed, so results do not depend on thread timing.
inline TrialTable run_trials(const RegressionConfig& base, const std::vector<FitMethod>& methods,
                             std::size_t reps, const std::vector<std::size_t>& sizes,
                             const FitOptions& opts, unsigned threads = 1) {
  if (reps < 2) throw DomainError("run_trials: reps must be >= 2");
  if (methods.empty() || sizes.empty()) throw DomainError("run_trials: empty methods or sizes");

  TrialTable table;
  table.sizes = sizes;
  for (const auto& m : methods) table.methods.push_back(m.name());

  struct Cell {
    double err_a, err_b;
  };
  std::vector<std::vector<std::vector<Cell>>> raw(
      sizes.size(), std::vector<std::vector<Cell>>(methods.size(), std::vector<Cell>(reps)));

  for (std::size_t si = 0; si < sizes.size(); ++si) {
    parallel_for(reps, threads, [&](std::size_t rep) {
      RegressionConfig cfg = base;
      cfg.n = sizes[si];
      cfg.seed = derive_seed(base.seed, si, rep);
      const RegressionData data = gen_regression(cfg);
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const LineFit f = fit_line(data.x, data.y, methods[mi], opts);
        raw[si][mi][rep] = {kTrueSlope - f.a, kTrueIntercept - f.b};
      }
    });
  }

  table.stats.assign(sizes.size(), std::vector<TrialStats>(methods.size()));
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      Vec ea(reps), eb(reps);
      for (std::size_t r = 0; r < reps; ++r) {
        ea[r] = raw[si][mi][r].err_a;
        eb[r] = raw[si][mi][r].err_b;
        table.records.push_back({sizes[si], r, table.methods[mi], ea[r], eb[r]});
      }
      TrialStats& st = table.stats[si][mi];
      st.mean_a = mean(ea);
      st.mean_b = mean(eb);
      st.std_a = sample_std(ea);
      st.std_b = sample_std(eb);
      double sa = 0, sb = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        sa += std::fabs(ea[r]);
        sb += std::fabs(eb[r]);
      }
      st.mae_a = sa / static_cast<double>(reps);
      st.mae_b = sb / static_cast<double>(reps);
    }
  }
  return table;
}

/// MAE of the intercept error per data size, for the convergence plots.
inline std::vector<std::vector<double>> mae_curve(const RegressionConfig& base,
                                                  const std::vector<FitMethod>& methods,
                                                  const std::vector<std::size_t>& sizes,
                                                  std::size_t reps, const FitOptions& opts,
                                                  unsigned threads = 1) {
  const TrialTable t = run_trials(base, methods, reps, sizes, opts, threads);
  std::vector<std::vector<double>> curve(methods.size(), std::vector<double>(sizes.size()));
  for (std::size_t si = 0; si < sizes.size(); ++si)
    for (std::size_t mi = 0; mi < methods.size(); ++mi) curve[mi][si] = t.stats[si][mi].mae_b;
  return curve;
}

}  // namespace emglab
