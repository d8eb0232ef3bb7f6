#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "emglab/em.hpp"
#include "emglab/errors.hpp"
#include "emglab/kernel.hpp"
#include "emglab/losses.hpp"
#include "emglab/matrix.hpp"
#include "emglab/model.hpp"
#include "emglab/sampling.hpp"
#include "emglab/spectra.hpp"

namespace emglab {

/// Low-rank background model B = U V with the columns of U constrained to
/// span(W), the retained eigenspace of the RBF kernel.
struct LowRankModel {
  Matrix u;  // n x k
  Matrix v;  // k x m
  Matrix w;  // n x r orthonormal

  Matrix background() const { return matmul(u, v); }
};

/// Bilinear fit target over the observed entries of S: M_t = (U V)_{i_t j_t}
/// with parameter blocks U and V, updated alternately; U is re-projected
/// onto span(W) after every accepted step.
class FactorAdapter final : public ModelAdapter {
 public:
  FactorAdapter(std::size_t n, std::size_t m, std::size_t k,
                std::vector<std::uint32_t> row_idx, std::vector<std::uint32_t> col_idx,
                const Matrix* projector, bool nonneg_v = false)
      : n_(n), m_(m), k_(k), rows_(std::move(row_idx)), cols_(std::move(col_idx)),
        projector_(projector), nonneg_v_(nonneg_v) {
    if (rows_.size() != cols_.size()) throw ContractError("FactorAdapter: index length mismatch");
    if (projector_ && projector_->rows() != n_) throw ContractError("FactorAdapter: projector row mismatch");
  }

  using ModelAdapter::grad_accumulate;

  std::size_t data_size() const override { return rows_.size(); }
  std::size_t param_size() const override { return n_ * k_ + k_ * m_; }
  std::size_t block_count() const override { return 2; }

  std::pair<std::size_t, std::size_t> block_span(std::size_t b) const override {
    return b == 0 ? std::pair<std::size_t, std::size_t>{0, n_ * k_}
                  : std::pair<std::size_t, std::size_t>{n_ * k_, k_ * m_};
  }

  void predict(const Vec& theta, Vec& out) const override {
    out.resize(rows_.size());
    const double* u = theta.data();
    const double* v = theta.data() + n_ * k_;
    for (std::size_t t = 0; t < rows_.size(); ++t) {
      const double* urow = u + rows_[t] * k_;
      const std::size_t j = cols_[t];
      double acc = 0.0;
      for (std::size_t c = 0; c < k_; ++c) acc += urow[c] * v[c * m_ + j];
      out[t] = acc;
    }
  }

  void grad_accumulate(const Vec& theta, const Vec& w, std::size_t block, Vec& grad) const override {
    check_weights(w);
    const double* u = theta.data();
    const double* v = theta.data() + n_ * k_;
    if (block == 0) {
      grad.assign(n_ * k_, 0.0);
      for (std::size_t t = 0; t < rows_.size(); ++t) {
        double* g = grad.data() + rows_[t] * k_;
        const std::size_t j = cols_[t];
        for (std::size_t c = 0; c < k_; ++c) g[c] += w[t] * v[c * m_ + j];
      }
    } else {
      grad.assign(k_ * m_, 0.0);
      for (std::size_t t = 0; t < rows_.size(); ++t) {
        const double* urow = u + rows_[t] * k_;
        const std::size_t j = cols_[t];
        for (std::size_t c = 0; c < k_; ++c) grad[c * m_ + j] += w[t] * urow[c];
      }
    }
  }

  void curvature_accumulate(const Vec& theta, const Vec& w2, std::size_t block, Vec& curv) const override {
    check_weights(w2);
    const double* u = theta.data();
    const double* v = theta.data() + n_ * k_;
    if (block == 0) {
      curv.assign(n_ * k_, 0.0);
      for (std::size_t t = 0; t < rows_.size(); ++t) {
        double* g = curv.data() + rows_[t] * k_;
        const std::size_t j = cols_[t];
        for (std::size_t c = 0; c < k_; ++c) {
          const double vc = v[c * m_ + j];
          g[c] += w2[t] * vc * vc;
        }
      }
    } else {
      curv.assign(k_ * m_, 0.0);
      for (std::size_t t = 0; t < rows_.size(); ++t) {
        const double* urow = u + rows_[t] * k_;
        const std::size_t j = cols_[t];
        for (std::size_t c = 0; c < k_; ++c) curv[c * m_ + j] += w2[t] * urow[c] * urow[c];
      }
    }
  }

  void project(Vec& theta, std::size_t block) const override {
    if (block == 0 && projector_) {
      Matrix u(n_, k_);
      for (std::size_t i = 0; i < n_ * k_; ++i) u.storage()[i] = theta[i];
      const Matrix p = project_columns(*projector_, u);
      for (std::size_t i = 0; i < n_ * k_; ++i) theta[i] = p.storage()[i];
    } else if (block == 1 && nonneg_v_) {
      for (std::size_t i = n_ * k_; i < theta.size(); ++i) theta[i] = std::max(theta[i], 0.0);
    }
  }

  // Gauge renormalization: before updating U, make the rows of V orthonormal
  // (absorbing the k x k transform into U), and symmetrically for V. B = UV
  // is invariant, U stays in span(W) because only column combinations touch
  // it, and the per-coordinate curvature becomes exact for uniform weights.
  // Fires only when the factor Gram matrix is noticeably ill-conditioned.
  void prepare_block(Vec& theta, std::size_t block) const override {
    if (nonneg_v_) return;  // a V sign-flip could leave the feasible set
    if (k_ > 3) return;     // fixed-size scratch below covers the benchmark ranks
    double* u = theta.data();
    double* v = theta.data() + n_ * k_;
    // Gram matrix of the factor being held fixed during this block update.
    double gram[9] = {0};
    if (block == 0) {
      for (std::size_t c = 0; c < k_; ++c)
        for (std::size_t c2 = c; c2 < k_; ++c2) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m_; ++j) acc += v[c * m_ + j] * v[c2 * m_ + j];
          gram[c * k_ + c2] = gram[c2 * k_ + c] = acc;
        }
    } else {
      for (std::size_t c = 0; c < k_; ++c)
        for (std::size_t c2 = c; c2 < k_; ++c2) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n_; ++i) acc += u[i * k_ + c] * u[i * k_ + c2];
          gram[c * k_ + c2] = gram[c2 * k_ + c] = acc;
        }
    }
    if (!needs_renormalization(gram)) return;

    double chol[9] = {0};
    if (!cholesky(gram, chol)) return;
    if (block == 0) {
      // V <- L^{-1} V (orthonormal rows), U <- U L.
      for (std::size_t j = 0; j < m_; ++j) forward_solve(chol, v + j, m_);
      for (std::size_t i = 0; i < n_; ++i) {
        double* urow = u + i * k_;
        double tmp[3] = {0};
        for (std::size_t c = 0; c < k_; ++c)
          for (std::size_t c2 = c; c2 < k_; ++c2) tmp[c] += urow[c2] * chol[c2 * k_ + c];
        for (std::size_t c = 0; c < k_; ++c) urow[c] = tmp[c];
      }
    } else {
      // U <- U L^{-T} (orthonormal columns, each row solves L x = u_row),
      // V <- L^T V.
      for (std::size_t i = 0; i < n_; ++i) forward_solve(chol, u + i * k_, 1);
      for (std::size_t j = 0; j < m_; ++j) {
        double tmp[3] = {0};
        for (std::size_t c = 0; c < k_; ++c)
          for (std::size_t c2 = c; c2 < k_; ++c2) tmp[c] += chol[c2 * k_ + c] * v[c2 * m_ + j];
        for (std::size_t c = 0; c < k_; ++c) v[c * m_ + j] = tmp[c];
      }
    }
  }

  Matrix unpack_u(const Vec& theta) const {
    Matrix u(n_, k_);
    for (std::size_t i = 0; i < n_ * k_; ++i) u.storage()[i] = theta[i];
    return u;
  }
  Matrix unpack_v(const Vec& theta) const {
    Matrix v(k_, m_);
    for (std::size_t i = 0; i < k_ * m_; ++i) v.storage()[i] = theta[n_ * k_ + i];
    return v;
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t k() const { return k_; }

 private:
  bool needs_renormalization(const double* gram) const {
    double max_diag = 0.0, min_diag = 1e300;
    for (std::size_t c = 0; c < k_; ++c) {
      max_diag = std::max(max_diag, gram[c * k_ + c]);
      min_diag = std::min(min_diag, gram[c * k_ + c]);
    }
    if (!(max_diag > 0.0)) return false;
    if (min_diag < 1e-8 * max_diag) return false;  // degenerate factor, leave alone
    if (max_diag > 1e3 * min_diag) return true;
    for (std::size_t c = 0; c < k_; ++c)
      for (std::size_t c2 = c + 1; c2 < k_; ++c2) {
        const double corr = std::fabs(gram[c * k_ + c2]) /
                            std::sqrt(gram[c * k_ + c] * gram[c2 * k_ + c2]);
        if (corr > 0.9) return true;
      }
    return false;
  }

  bool cholesky(const double* gram, double* chol) const {
    for (std::size_t c = 0; c < k_; ++c) {
      for (std::size_t c2 = 0; c2 <= c; ++c2) {
        double acc = gram[c * k_ + c2];
        for (std::size_t t = 0; t < c2; ++t) acc -= chol[c * k_ + t] * chol[c2 * k_ + t];
        if (c == c2) {
          if (!(acc > 1e-300)) return false;
          chol[c * k_ + c] = std::sqrt(acc);
        } else {
          chol[c * k_ + c2] = acc / chol[c2 * k_ + c2];
        }
      }
    }
    return true;
  }

  // Solves L x = b in place, where x[c] lives at x[c * stride].
  void forward_solve(const double* chol, double* x, std::size_t stride) const {
    for (std::size_t c = 0; c < k_; ++c) {
      double acc = x[c * stride];
      for (std::size_t t = 0; t < c; ++t) acc -= chol[c * k_ + t] * x[t * stride];
      x[c * stride] = acc / chol[c * k_ + c];
    }
  }

  std::size_t n_, m_, k_;
  std::vector<std::uint32_t> rows_, cols_;
  const Matrix* projector_;
  bool nonneg_v_;
};

/// Fit objective selector shared by the regression and PMF benches.
struct FitMethod {
  enum class Kind { Loss, Emgm } kind = Kind::Loss;
  LossKind loss = LossKind::l2();

  static FitMethod l2() { return {Kind::Loss, LossKind::l2()}; }
  static FitMethod l1() { return {Kind::Loss, LossKind::l1()}; }
  static FitMethod huber(double d) { return {Kind::Loss, LossKind::huber(d)}; }
  static FitMethod pinball(double q) { return {Kind::Loss, LossKind::pinball(q)}; }
  static FitMethod emgm() { return {Kind::Emgm, LossKind::l2()}; }

  bool is_emgm() const { return kind == Kind::Emgm; }
  std::string name() const { return is_emgm() ? std::string("emgm") : loss.name(); }
};

struct PmfOptions {
  double lengthscale = 5.0;
  double rkhs_tol = 1e-6;
  double init_quantile = 0.3;      // quantile factorization feeding the EMGM init
  bool nonneg_v = false;
  double sigma_prior_factor = 0.1;  // prior scale = factor * mean column max
  FitOptions fit{};

  PmfOptions() {
    fit.max_em_iters = 100;
    fit.max_inner_iters = 8;
    fit.loglik_rel_tol = 1e-7;
  }
};

struct BackgroundFit {
  LowRankModel model;
  FitResult fit;
  FitResult init_fit;  // the quantile factorization behind an EMGM fit, if any
};

namespace detail {

struct MaskedData {
  std::vector<std::uint32_t> rows, cols;
  Vec values;
};

inline MaskedData collect_observed(const SpectroDataset& ds) {
  MaskedData md;
  const std::size_t n = ds.n(), m = ds.m();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (ds.observed(i, j)) {
        md.rows.push_back(static_cast<std::uint32_t>(i));
        md.cols.push_back(static_cast<std::uint32_t>(j));
        md.values.push_back(ds.s(i, j));
      }
  return md;
}

// MLE of the mixture parameters on a residual sample with the location held
// at zero: a short EM run with no free model parameters.
inline MixtureParams mixture_mle_on_residuals(const Vec& residuals, const FitOptions& opts) {
  Vec pos, neg;
  for (double r : residuals) (r >= 0.0 ? pos : neg).push_back(r);
  double sigma0 = sample_std(neg);
  if (!(sigma0 > 1e-6)) sigma0 = std::max(1e-6, sample_std(residuals));
  double pos_mean = 1e-3;
  if (!pos.empty()) pos_mean = std::max(1e-6, mean(pos));
  MixtureParams init{EmgParams{0.0, sigma0, 1.0 / pos_mean}, 0.5};

  FitOptions mle_opts = opts;
  mle_opts.max_em_iters = std::max<std::size_t>(opts.max_em_iters, 50);
  FixedAdapter fixed{Vec(residuals.size(), 0.0)};
  const FitResult r = fit_emgm(residuals, fixed, Vec{}, init, mle_opts);
  return r.mix;
}

}  // namespace detail

/// Low-rank background inference on the observed entries of S under the
/// chosen objective. Initialization: U = W(W^T R_U), V = R_V with uniform
/// R_U, R_V. The EMGM path first runs the quantile factorization, estimates
/// the mixture parameters on its residuals, and continues from its factors.
inline BackgroundFit fit_background(const SpectroDataset& ds, std::size_t k, const FitMethod& method,
                                    const PmfOptions& opts, std::uint64_t seed,
                                    const Matrix* precomputed_w = nullptr) {
  if (k < 1) throw DomainError("fit_background: k must be >= 1");
  const std::size_t n = ds.n(), m = ds.m();
  detail::MaskedData md = detail::collect_observed(ds);
  if (md.values.size() < k * (n + m))
    throw FitError("fit_background: not enough observed entries for rank " + std::to_string(k));

  Matrix w;
  if (precomputed_w) {
    w = *precomputed_w;
  } else {
    w = rkhs_projector(rbf_kernel(ds.grid, opts.lengthscale), opts.rkhs_tol);
  }

  FactorAdapter adapter(n, m, k, md.rows, md.cols, &w, opts.nonneg_v);

  SeededRng rng(seed);
  Matrix ru(n, k);
  for (double& vx : ru.storage()) vx = rng.uniform();
  Matrix u0 = project_columns(w, ru);
  Vec theta(adapter.param_size());
  for (std::size_t i = 0; i < n * k; ++i) theta[i] = u0.storage()[i];
  for (std::size_t i = n * k; i < theta.size(); ++i) theta[i] = rng.uniform();

  BackgroundFit out;
  if (!method.is_emgm()) {
    out.fit = fit_loss(md.values, adapter, method.loss, theta, opts.fit);
  } else {
    // Quantile factorization first; mixture MLE on its residuals; then GEM.
    out.init_fit = fit_loss(md.values, adapter, LossKind::pinball(opts.init_quantile), theta, opts.fit);
    Vec preds;
    adapter.predict(out.init_fit.theta, preds);
    Vec residuals(md.values.size());
    for (std::size_t t = 0; t < residuals.size(); ++t) residuals[t] = md.values[t] - preds[t];

    FitOptions emgm_opts = opts.fit;
    if (opts.sigma_prior_factor > 0.0) {
      double colmax_sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        double peak = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (ds.observed(i, j)) peak = std::max(peak, std::fabs(ds.s(i, j)));
        colmax_sum += peak;
      }
      emgm_opts.sigma_prior_scale = opts.sigma_prior_factor * colmax_sum / static_cast<double>(m);
    }
    const MixtureParams mix0 = detail::mixture_mle_on_residuals(residuals, emgm_opts);
    out.fit = fit_emgm(md.values, adapter, out.init_fit.theta, mix0, emgm_opts);
  }

  out.model.u = adapter.unpack_u(out.fit.theta);
  out.model.v = adapter.unpack_v(out.fit.theta);
  out.model.w = std::move(w);
  return out;
}

/// Per-spectrogram normalized error norms between an estimated and a true
/// background: e2_j = |bhat_j - b_j|_2 / sqrt(n), e1_j = |bhat_j - b_j|_1 / n.
struct BackgroundErrors {
  double mean_l2 = 0, std_l2 = 0;
  double mean_l1 = 0, std_l1 = 0;
};

inline BackgroundErrors background_errors(const Matrix& b_hat, const Matrix& truth) {
  if (b_hat.rows() != truth.rows() || b_hat.cols() != truth.cols())
    throw ContractError("background_errors: shape mismatch");
  const std::size_t n = b_hat.rows(), m = b_hat.cols();
  Vec e2(m), e1(m);
  for (std::size_t j = 0; j < m; ++j) {
    double s2 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = b_hat(i, j) - truth(i, j);
      s2 += d * d;
      s1 += std::fabs(d);
    }
    e2[j] = std::sqrt(s2 / static_cast<double>(n));
    e1[j] = s1 / static_cast<double>(n);
  }
  BackgroundErrors out;
  out.mean_l2 = mean(e2);
  out.std_l2 = sample_std(e2);
  out.mean_l1 = mean(e1);
  out.std_l1 = sample_std(e1);
  return out;
}

}  // namespace emglab
