#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "emglab/emg.hpp"
#include "emglab/errors.hpp"
#include "emglab/numeric_util.hpp"

namespace emglab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// Deterministic per-trial seed, mixed from a master seed and up to two
/// stream indices. Stable across platforms and thread schedules.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = master;
  (void)detail::splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
  (void)detail::splitmix64(s);
  s ^= 0xc2b2ae3d27d4eb4fULL * (b + 1);
  return detail::splitmix64(s);
}

/// xoshiro256++ generator with hand-rolled distributions, so that all
/// sampling is reproducible independently of the standard library build.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cache_ = v * f;
    has_cache_ = true;
    return u * f;
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  double lognormal(double mu_ln, double sigma_ln) { return std::exp(mu_ln + sigma_ln * normal()); }

 private:
  std::uint64_t state_[4];
  double cache_ = 0.0;
  bool has_cache_ = false;
};

/// n i.i.d. draws of r = Exp(lambda) + N(mu, sigma).
inline Vec emg_sample(SeededRng& rng, const EmgParams& p, std::size_t n) {
  p.validate();
  if (n < 1) throw DomainError("emg_sample: n must be >= 1");
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.exponential(p.lambda) + rng.normal(p.mu, p.sigma);
  return out;
}

}  // namespace emglab
