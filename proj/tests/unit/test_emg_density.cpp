#include <doctest.h>

#include <cmath>

#include "emglab/emg.hpp"
#include "emglab/sampling.hpp"
#include "support/oracles.hpp"

using emglab::EmgParams;
using emglab::MixtureParams;

namespace {

const double kGridMu[] = {-1.0, 0.0, 2.0};
const double kGridSigma[] = {0.3, 1.0, 3.0};
const double kGridLambda[] = {0.2, 1.0, 5.0};

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(EmgParams(0.0, 0.0, 1.0), emglab::DomainError);
  CHECK_THROWS_AS(EmgParams(0.0, 1.0, -1.0), emglab::DomainError);
  CHECK_THROWS_AS(EmgParams(0.0, 1e-13, 1.0), emglab::DomainError);
  CHECK_THROWS_AS(EmgParams(NAN, 1.0, 1.0), emglab::DomainError);
  CHECK_THROWS_AS(MixtureParams(EmgParams(0, 1, 1), 1.5), emglab::DomainError);
  CHECK_NOTHROW(MixtureParams(EmgParams(0, 1, 1), 0.0));
}

TEST_CASE("emg_log_pdf frozen oracle value at the origin") {
  // Frozen from the Exp*N convolution quadrature oracle.
  CHECK(emglab::emg_log_pdf(0.0, {0.0, 1.0, 1.0}) ==
        doctest::Approx(-1.3410216450092635).epsilon(1e-13));
}

TEST_CASE("emg_log_pdf matches the convolution oracle on the parameter grid") {
  for (double mu : kGridMu) {
    for (double sigma : kGridSigma) {
      for (double lambda : kGridLambda) {
        const EmgParams p{mu, sigma, lambda};
        const double xs[] = {mu - 2.0 * sigma, mu, mu + 0.5 / lambda, mu + 2.0 * sigma + 1.0 / lambda,
                             mu + 5.0 * sigma + 3.0 / lambda};
        for (double x : xs) {
          const long double conv = oracles::emg_pdf_convolution(x, mu, sigma, lambda);
          const double expected = static_cast<double>(logl(conv));
          CAPTURE(mu);
          CAPTURE(sigma);
          CAPTURE(lambda);
          CAPTURE(x);
          CHECK(std::fabs(emglab::emg_log_pdf(x, p) - expected) <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("emg density integrates to one") {
  for (double sigma : kGridSigma) {
    for (double lambda : kGridLambda) {
      const EmgParams p{0.5, sigma, lambda};
      auto f = [&](long double x) {
        return static_cast<long double>(std::exp(emglab::emg_log_pdf(static_cast<double>(x), p)));
      };
      const long double lo = 0.5 - 10.0 * sigma;
      const long double hi = 0.5 + 10.0 * sigma + 60.0 / lambda;
      const double integral = static_cast<double>(oracles::integrate(f, lo, hi, 1e-12L));
      CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("stability deep in the Gaussian tail") {
  for (double sigma : kGridSigma) {
    for (double lambda : kGridLambda) {
      const EmgParams p{1.0, sigma, lambda};
      const double far_left = 1.0 - 50.0 * sigma - 50.0 / lambda;
      const double far_right = 1.0 + 50.0 * sigma + 50.0 / lambda;
      const double ll = emglab::emg_log_pdf(far_left, p);
      const double lr = emglab::emg_log_pdf(far_right, p);
      CHECK(std::isfinite(ll));
      CHECK(std::isfinite(lr));
      CHECK(ll < 0.0);
    }
  }
  // x = mu - 40 sigma explicitly.
  CHECK(std::isfinite(emglab::emg_log_pdf(-40.0, {0.0, 1.0, 1.0})));
}

TEST_CASE("standard form: alpha = lambda reduction and location-scale identity") {
  emglab::SeededRng rng(77);
  // Same frozen convolution-oracle value as the three-parameter form.
  CHECK(emglab::std_emg_log_pdf(0.0, 1.0) ==
        doctest::Approx(-1.3410216450092635).epsilon(1e-13));
  // alpha = lambda equals the mu=0, sigma=1 density exactly.
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-8.0, 8.0);
    const double lambda = rng.uniform(0.1, 4.0);
    CHECK(emglab::std_emg_log_pdf(x, lambda) ==
          doctest::Approx(emglab::emg_log_pdf(x, {0.0, 1.0, lambda})).epsilon(1e-15));
  }
  // Theorem-1 identity over a 10x10x10 grid.
  for (int im = 0; im < 10; ++im) {
    for (int is = 0; is < 10; ++is) {
      for (int il = 0; il < 10; ++il) {
        const double mu = -3.0 + 6.0 * im / 9.0;
        const double sigma = 0.2 + 2.8 * is / 9.0;
        const double lambda = 0.1 + 4.0 * il / 9.0;
        const double x = mu + rng.uniform(-4.0, 6.0) * sigma;
        const double lhs = emglab::emg_log_pdf(x, {mu, sigma, lambda});
        const double rhs = -std::log(sigma) + emglab::std_emg_log_pdf((x - mu) / sigma, lambda * sigma);
        CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max({1.0, std::fabs(lhs), std::fabs(rhs)}));
      }
    }
  }
  CHECK_THROWS_AS(emglab::std_emg_log_pdf(0.0, -1.0), emglab::DomainError);
}

TEST_CASE("mixture log pdf") {
  const EmgParams p{0.0, 1.0, 1.0};
  SUBCASE("degenerate weights") {
    CHECK(emglab::emgm_log_pdf(0.7, {p, 0.0}) == emglab::gauss_log_pdf(0.7, 0.0, 1.0));
    CHECK(emglab::emgm_log_pdf(0.7, {p, 1.0}) == emglab::emg_log_pdf(0.7, p));
  }
  SUBCASE("equal-weight value from the component oracles") {
    const double emg_density = 0.26157829186512337;  // convolution oracle
    const double gauss_density = 0.3989422804014327;
    const double expected = std::log(0.5 * gauss_density + 0.5 * emg_density);
    CHECK(emglab::emgm_log_pdf(0.0, {p, 0.5}) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("analytic partials match central finite differences") {
  emglab::SeededRng rng(2024);
  int checked = 0;
  for (int i = 0; i < 120; ++i) {
    const double mu = rng.uniform(-2.0, 2.0);
    const double sigma = rng.uniform(0.2, 2.5);
    const double lambda = rng.uniform(0.1, 3.0);
    const double x = mu + rng.uniform(-5.0, 7.0) * sigma;
    const EmgParams p{mu, sigma, lambda};
    const auto a = emglab::neg_log_emg_partials(x, p);

    auto neg = [&](double m2, double s2, double l2) {
      return -emglab::emg_log_pdf(x, {m2, s2, l2});
    };
    const double hm = 1e-6 * std::max(1.0, std::fabs(mu));
    const double hs = 1e-6 * sigma;
    const double hl = 1e-6 * lambda;
    const double fd_mu = oracles::central_diff([&](double v) { return neg(v, sigma, lambda); }, mu, hm);
    const double fd_sg = oracles::central_diff([&](double v) { return neg(mu, v, lambda); }, sigma, hs);
    const double fd_la = oracles::central_diff([&](double v) { return neg(mu, sigma, v); }, lambda, hl);
    CAPTURE(mu);
    CAPTURE(sigma);
    CAPTURE(lambda);
    CAPTURE(x);
    CHECK(a.d_mu == doctest::Approx(fd_mu).epsilon(1e-6).scale(std::fabs(a.d_mu) + 1.0));
    CHECK(a.d_sigma == doctest::Approx(fd_sg).epsilon(1e-6).scale(std::fabs(a.d_sigma) + 1.0));
    CHECK(a.d_lambda == doctest::Approx(fd_la).epsilon(1e-6).scale(std::fabs(a.d_lambda) + 1.0));

    const double fd2_mu =
        oracles::central_diff2([&](double v) { return neg(v, sigma, lambda); }, mu, 1e-4 * std::max(1.0, std::fabs(mu)));
    const double fd2_sg =
        oracles::central_diff2([&](double v) { return neg(mu, v, lambda); }, sigma, 1e-4 * sigma);
    const double fd2_la =
        oracles::central_diff2([&](double v) { return neg(mu, sigma, v); }, lambda, 1e-4 * lambda);
    CHECK(a.d2_mu == doctest::Approx(fd2_mu).epsilon(2e-5).scale(std::fabs(a.d2_mu) + 1.0));
    CHECK(a.d2_sigma == doctest::Approx(fd2_sg).epsilon(2e-5).scale(std::fabs(a.d2_sigma) + 1.0));
    CHECK(a.d2_lambda == doctest::Approx(fd2_la).epsilon(2e-5).scale(std::fabs(a.d2_lambda) + 1.0));
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("numerical convexity: strict in mu everywhere, in lambda where 1/lambda > sigma") {
  emglab::SeededRng rng(31415);
  for (int i = 0; i < 20 * 20 * 20; ++i) {
    const double mu = rng.uniform(-3.0, 3.0);
    const double sigma = rng.uniform(0.1, 3.0);
    const double lambda = rng.uniform(0.05, 4.0);
    double x = mu + rng.uniform(-8.0, 10.0) * std::max(sigma, 1.0 / lambda);
    // Keep u >= -25: past the erfcx overflow point the exponentially small
    // curvature in mu underflows double precision to an honest zero.
    x = std::min(x, mu + lambda * sigma * sigma + 25.0 * M_SQRT2 * sigma);
    const auto a = emglab::neg_log_emg_partials(x, {mu, sigma, lambda});
    CAPTURE(mu);
    CAPTURE(sigma);
    CAPTURE(lambda);
    CAPTURE(x);
    CHECK(a.d2_mu > 0.0);
    if (1.0 / lambda > sigma) CHECK(a.d2_lambda > 0.0);
  }
}

TEST_CASE("gaussian partials match finite differences") {
  emglab::SeededRng rng(5);
  for (int i = 0; i < 40; ++i) {
    const double mu = rng.uniform(-2.0, 2.0);
    const double sigma = rng.uniform(0.3, 2.0);
    const double x = rng.uniform(-5.0, 5.0);
    const auto g = emglab::neg_log_gauss_partials(x, mu, sigma);
    auto neg = [&](double m, double s) { return -emglab::gauss_log_pdf(x, m, s); };
    CHECK(g.d_mu == doctest::Approx(oracles::central_diff([&](double v) { return neg(v, sigma); }, mu, 1e-6))
                        .epsilon(1e-6)
                        .scale(std::fabs(g.d_mu) + 1.0));
    CHECK(g.d_sigma ==
          doctest::Approx(oracles::central_diff([&](double v) { return neg(mu, v); }, sigma, 1e-6 * sigma))
              .epsilon(1e-6)
              .scale(std::fabs(g.d_sigma) + 1.0));
  }
}
