#pragma once

#include <cstddef>
#include <utility>

#include "emglab/errors.hpp"
#include "emglab/numeric_util.hpp"

namespace emglab {

/// Fit target M(theta): per-datum predictions plus weighted gradient and
/// Gauss-Newton curvature accumulation. Parameters are grouped into blocks
/// within which M is linear; optimizers update one block at a time, with
/// the other blocks held fixed, and re-project after each step.
class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;

  virtual std::size_t data_size() const = 0;
  virtual std::size_t param_size() const = 0;
  virtual std::size_t block_count() const { return param_size() == 0 ? 0 : 1; }

  /// [offset, length) of block b inside the packed parameter vector.
  virtual std::pair<std::size_t, std::size_t> block_span(std::size_t b) const {
    (void)b;
    return {0, param_size()};
  }

  /// out[i] = M_i(theta); out is resized to data_size().
  virtual void predict(const Vec& theta, Vec& out) const = 0;

  /// grad[j] = sum_i w[i] * dM_i/dtheta_j over the coordinates of block b.
  virtual void grad_accumulate(const Vec& theta, const Vec& w, std::size_t block, Vec& grad) const = 0;

  /// curv[j] = sum_i w2[i] * (dM_i/dtheta_j)^2 over the coordinates of block b.
  /// Exact diagonal curvature of sum_i rho_i(M_i) whenever M is linear in the block.
  virtual void curvature_accumulate(const Vec& theta, const Vec& w2, std::size_t block,
                                    Vec& curv) const = 0;

  /// Maps block b of theta back to its feasible set; identity by default.
  virtual void project(Vec& theta, std::size_t block) const {
    (void)theta;
    (void)block;
  }

  /// Optional re-parameterization hook run before block b is optimized.
  /// Must leave predict(theta) invariant (up to roundoff); used by the
  /// factor model to keep the per-coordinate curvature honest when factor
  /// columns become strongly correlated.
  virtual void prepare_block(Vec& theta, std::size_t block) const {
    (void)theta;
    (void)block;
  }

  /// Full-parameter convenience form of grad_accumulate (linear in w).
  Vec grad_accumulate(const Vec& theta, const Vec& w) const {
    Vec full(param_size(), 0.0);
    for (std::size_t b = 0; b < block_count(); ++b) {
      const auto [off, len] = block_span(b);
      Vec g(len, 0.0);
      grad_accumulate(theta, w, b, g);
      for (std::size_t j = 0; j < len; ++j) full[off + j] = g[j];
    }
    return full;
  }

 protected:
  void check_weights(const Vec& w) const {
    if (w.size() != data_size()) throw ContractError("ModelAdapter: weight length mismatch");
  }
};

/// M_i = a*x_i + b with theta = (a, b).
class LineAdapter final : public ModelAdapter {
 public:
  explicit LineAdapter(Vec xs) : xs_(std::move(xs)) {
    if (xs_.size() < 2) throw DomainError("LineAdapter: need at least two points");
  }

  using ModelAdapter::grad_accumulate;

  std::size_t data_size() const override { return xs_.size(); }
  std::size_t param_size() const override { return 2; }

  void predict(const Vec& theta, Vec& out) const override {
    out.resize(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) out[i] = theta[0] * xs_[i] + theta[1];
  }

  void grad_accumulate(const Vec&, const Vec& w, std::size_t, Vec& grad) const override {
    check_weights(w);
    grad.assign(2, 0.0);
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      grad[0] += w[i] * xs_[i];
      grad[1] += w[i];
    }
  }

  void curvature_accumulate(const Vec&, const Vec& w2, std::size_t, Vec& curv) const override {
    check_weights(w2);
    curv.assign(2, 0.0);
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      curv[0] += w2[i] * xs_[i] * xs_[i];
      curv[1] += w2[i];
    }
  }

  const Vec& xs() const { return xs_; }

 private:
  Vec xs_;
};

/// M = theta (one free location per datum).
class IdentityAdapter final : public ModelAdapter {
 public:
  explicit IdentityAdapter(std::size_t n) : n_(n) {}

  using ModelAdapter::grad_accumulate;

  std::size_t data_size() const override { return n_; }
  std::size_t param_size() const override { return n_; }

  void predict(const Vec& theta, Vec& out) const override { out = theta; }

  void grad_accumulate(const Vec&, const Vec& w, std::size_t, Vec& grad) const override {
    check_weights(w);
    grad = w;
  }

  void curvature_accumulate(const Vec&, const Vec& w2, std::size_t, Vec& curv) const override {
    check_weights(w2);
    curv = w2;
  }

 private:
  std::size_t n_;
};

/// M_i = theta_0 for all i (scalar shared location).
class ConstantAdapter final : public ModelAdapter {
 public:
  explicit ConstantAdapter(std::size_t n) : n_(n) {}

  using ModelAdapter::grad_accumulate;

  std::size_t data_size() const override { return n_; }
  std::size_t param_size() const override { return 1; }

  void predict(const Vec& theta, Vec& out) const override { out.assign(n_, theta[0]); }

  void grad_accumulate(const Vec&, const Vec& w, std::size_t, Vec& grad) const override {
    check_weights(w);
    grad.assign(1, 0.0);
    for (double v : w) grad[0] += v;
  }

  void curvature_accumulate(const Vec&, const Vec& w2, std::size_t, Vec& curv) const override {
    check_weights(w2);
    curv.assign(1, 0.0);
    for (double v : w2) curv[0] += v;
  }

 private:
  std::size_t n_;
};

/// Frozen predictions and no free parameters; used to fit mixture
/// parameters alone on a residual sample.
class FixedAdapter final : public ModelAdapter {
 public:
  explicit FixedAdapter(Vec preds) : preds_(std::move(preds)) {}

  using ModelAdapter::grad_accumulate;

  std::size_t data_size() const override { return preds_.size(); }
  std::size_t param_size() const override { return 0; }

  void predict(const Vec&, Vec& out) const override { out = preds_; }

  void grad_accumulate(const Vec&, const Vec&, std::size_t, Vec& grad) const override {
    grad.clear();
  }
  void curvature_accumulate(const Vec&, const Vec&, std::size_t, Vec& curv) const override {
    curv.clear();
  }

 private:
  Vec preds_;
};

}  // namespace emglab
