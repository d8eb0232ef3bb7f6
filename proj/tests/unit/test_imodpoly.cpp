#include <doctest.h>

#include <cmath>

#include "emglab/imodpoly.hpp"
#include "emglab/sampling.hpp"

using emglab::Vec;

namespace {

Vec peak(std::size_t n, double center, double width, double amp) {
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (static_cast<double>(i) - center) / width;
    out[i] = amp * std::exp(-0.5 * d * d);
  }
  return out;
}

}  // namespace

TEST_CASE("polynomial input is a fixed point") {
  const std::size_t n = 200;
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    y[i] = 0.3 + 0.8 * t - 1.1 * t * t + 0.4 * t * t * t;
  }
  const Vec bg = emglab::imodpoly(y, 3);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(bg[i] - y[i]) < 1e-8);
}

TEST_CASE("flat baseline plus one tall narrow peak") {
  const std::size_t n = 400;
  Vec y(n, 0.2);
  const Vec p = peak(n, 200.0, 4.0, 3.0);
  for (std::size_t i = 0; i < n; ++i) y[i] += p[i];
  const Vec bg = emglab::imodpoly(y, 5);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(static_cast<double>(i) - 200.0) > 40.0) {
      CAPTURE(i);
      CHECK(std::fabs(bg[i] - 0.2) < 0.01);
    }
  }
}

TEST_CASE("high degree absorbs peak mass on a multi-peak spectrogram") {
  emglab::SeededRng rng(14);
  const std::size_t n = 512;
  Vec truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    truth[i] = 0.3 + 0.2 * std::sin(2.0 * M_PI * t);
  }
  Vec y = truth;
  for (int p = 0; p < 5; ++p) {
    const Vec pk = peak(n, rng.uniform(50.0, 460.0), rng.uniform(3.0, 6.0), rng.uniform(0.5, 1.5));
    for (std::size_t i = 0; i < n; ++i) y[i] += pk[i];
  }
  const Vec high = emglab::imodpoly(y, 25);
  double bg_mass = 0.0, truth_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    bg_mass += high[i];
    truth_mass += truth[i];
  }
  CHECK(bg_mass > truth_mass);  // the flexible fit chases the peaks
}

TEST_CASE("contract checks") {
  Vec y(10, 1.0);
  CHECK_THROWS_AS(emglab::imodpoly(y, 10), emglab::ContractError);
  y[3] = NAN;
  CHECK_THROWS_AS(emglab::imodpoly(y, 2), emglab::DomainError);
}
