#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "emglab/errors.hpp"
#include "emglab/kernel.hpp"
#include "emglab/matrix.hpp"
#include "emglab/numeric_util.hpp"
#include "emglab/sampling.hpp"

namespace emglab {

/// One spectroscopic dataset: channel grid, observation matrix S with one
/// spectrogram per column, per-entry observability mask, and (for synthetic
/// data) the ground-truth background.
struct SpectroDataset {
  Vec grid;                       // length n
  Matrix s;                       // n x m
  std::vector<std::uint8_t> mask;  // n*m, row-major; 1 = observed
  std::optional<Matrix> truth_b;  // n x m

  std::size_t n() const { return s.rows(); }
  std::size_t m() const { return s.cols(); }
  bool observed(std::size_t i, std::size_t j) const { return mask[i * s.cols() + j] != 0; }
};

struct SpectraGenConfig {
  std::size_t n = 1024;
  std::size_t m = 64;
  std::size_t k = 2;              // background rank, 1..3 in the benchmarks
  std::size_t min_peaks = 60;     // dense trains, as in diffraction patterns
  std::size_t max_peaks = 150;
  double min_peak_width = 2.0;
  double max_peak_width = 6.0;
  double peak_amp_mean = 0.35;    // exponential amplitude mean
  double lorentzian_fraction = 0.25;
  double noise_sigma = 0.01;
  double background_smoothness = 40.0;  // Gaussian filter width, in channels
  double min_activation = 0.3;
  double max_activation = 1.0;
  double hidden_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 8 || m < 1 || k < 1) throw DomainError("SpectraGenConfig: n, m, k out of range");
    if (min_peaks > max_peaks) throw DomainError("SpectraGenConfig: bad peak count range");
    if (!(min_peak_width > 0.0 && max_peak_width >= min_peak_width))
      throw DomainError("SpectraGenConfig: bad peak width range");
    if (!(peak_amp_mean > 0.0)) throw DomainError("SpectraGenConfig: peak_amp_mean must be > 0");
    if (!(lorentzian_fraction >= 0.0 && lorentzian_fraction <= 1.0))
      throw DomainError("SpectraGenConfig: lorentzian_fraction must be in [0,1]");
    if (!(noise_sigma >= 0.0)) throw DomainError("SpectraGenConfig: noise_sigma must be >= 0");
    if (!(background_smoothness > 0.0))
      throw DomainError("SpectraGenConfig: background_smoothness must be > 0");
    if (!(min_activation > 0.0 && max_activation >= min_activation))
      throw DomainError("SpectraGenConfig: bad activation range");
    if (!(hidden_fraction >= 0.0 && hidden_fraction < 1.0))
      throw DomainError("SpectraGenConfig: hidden_fraction must be in [0,1)");
  }
};

namespace detail {

// Smooth nonnegative unit-max background component: a rectified uniform
// random vector run through a Gaussian filter much wider than the fit
// kernel's lengthscale, so the component lies in the retained RKHS span to
// far below the benchmark error levels.
inline Vec smooth_background_component(SeededRng& rng, std::size_t n, double width) {
  Vec raw(n);
  for (double& v : raw) v = rng.uniform();
  const int half = static_cast<int>(std::ceil(4.0 * width));
  std::vector<double> kern(2 * half + 1);
  double ksum = 0.0;
  for (int t = -half; t <= half; ++t) {
    kern[t + half] = std::exp(-0.5 * (t / width) * (t / width));
    ksum += kern[t + half];
  }
  for (double& v : kern) v /= ksum;
  Vec out(n, 0.0);
  const long period = n > 1 ? 2 * static_cast<long>(n) - 2 : 1;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int t = -half; t <= half; ++t) {
      // Reflect at the boundaries to avoid edge dips; the filter support can
      // exceed n, so fold onto the full reflection period.
      long j = static_cast<long>(i) + t;
      j = ((j % period) + period) % period;
      if (j >= static_cast<long>(n)) j = period - j;
      acc += kern[t + half] * raw[static_cast<std::size_t>(j)];
    }
    out[i] = acc;
  }
  double lo = out[0], hi = out[0];
  for (double v : out) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  for (double& v : out) v = span > 0.0 ? (v - lo) / span : 1.0;
  return out;
}

}  // namespace detail

/// Synthetic spectra: S = truth_B + peak trains + Gaussian noise, with each
/// column scaled to unit maximum before the noise is added (the truth is
/// rescaled by the same factor). Deterministic given the seed.
///
/// When a span projector W is supplied (n x r, orthonormal columns), the
/// background components are projected through it so the truth is exactly
/// representable by the constrained factor model.
inline SpectroDataset gen_spectra(const SpectraGenConfig& cfg, const Matrix* span_projector = nullptr) {
  cfg.validate();
  if (span_projector && span_projector->rows() != cfg.n)
    throw ContractError("gen_spectra: projector row count must equal n");
  SeededRng rng(cfg.seed);
  const std::size_t n = cfg.n, m = cfg.m, k = cfg.k;

  SpectroDataset ds;
  ds.grid.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.grid[i] = static_cast<double>(i);

  Matrix u(n, k);
  for (std::size_t c = 0; c < k; ++c) {
    const Vec comp = detail::smooth_background_component(rng, n, cfg.background_smoothness);
    for (std::size_t i = 0; i < n; ++i) u(i, c) = comp[i];
  }
  if (span_projector) u = project_columns(*span_projector, u);
  Matrix v(k, m);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < m; ++j) v(c, j) = rng.uniform(cfg.min_activation, cfg.max_activation);

  Matrix truth = matmul(u, v);
  Matrix raw = truth;

  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t count =
        cfg.min_peaks + (cfg.max_peaks > cfg.min_peaks
                             ? rng.uniform_index(cfg.max_peaks - cfg.min_peaks + 1)
                             : 0);
    for (std::size_t p = 0; p < count; ++p) {
      const double center = rng.uniform(0.0, static_cast<double>(n - 1));
      const double width = rng.uniform(cfg.min_peak_width, cfg.max_peak_width);
      const double amp = rng.exponential(1.0 / cfg.peak_amp_mean);
      const bool lorentz = rng.uniform() < cfg.lorentzian_fraction;
      const long lo = std::max(0L, static_cast<long>(std::floor(center - 12.0 * width)));
      const long hi = std::min(static_cast<long>(n) - 1,
                               static_cast<long>(std::ceil(center + 12.0 * width)));
      for (long i = lo; i <= hi; ++i) {
        const double d = static_cast<double>(i) - center;
        const double profile = lorentz ? width * width / (d * d + width * width)
                                       : std::exp(-0.5 * (d / width) * (d / width));
        raw(static_cast<std::size_t>(i), j) += amp * profile;
      }
    }
  }

  // Per-column unit-max scaling before noise; truth gets the same factor.
  for (std::size_t j = 0; j < m; ++j) {
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, raw(i, j));
    const double f = peak > 0.0 ? 1.0 / peak : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      raw(i, j) *= f;
      truth(i, j) *= f;
    }
  }
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (cfg.noise_sigma > 0.0) raw(i, j) += rng.normal(0.0, cfg.noise_sigma);

  ds.s = std::move(raw);
  ds.truth_b = std::move(truth);
  ds.mask.assign(n * m, 1);
  if (cfg.hidden_fraction > 0.0) {
    const std::size_t hide = static_cast<std::size_t>(cfg.hidden_fraction * static_cast<double>(n * m));
    // Partial Fisher-Yates over entry indices.
    std::vector<std::size_t> idx(n * m);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < hide; ++i) {
      const std::size_t j = i + rng.uniform_index(idx.size() - i);
      std::swap(idx[i], idx[j]);
      ds.mask[idx[i]] = 0;
    }
  }
  return ds;
}

}  // namespace emglab
