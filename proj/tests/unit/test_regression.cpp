#include <doctest.h>

#include <cmath>

#include "emglab/regression.hpp"

using emglab::FitMethod;
using emglab::RegressionConfig;
using emglab::Vec;

TEST_CASE("generator determinism and exact contamination count") {
  RegressionConfig cfg;
  cfg.n = 400;
  cfg.seed = 97;
  const auto a = emglab::gen_regression(cfg);
  const auto b = emglab::gen_regression(cfg);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.contaminated == b.contaminated);

  std::size_t count = 0;
  for (auto c : a.contaminated) count += c;
  CHECK(count == static_cast<std::size_t>(0.25 * 400));
}

TEST_CASE("uncontaminated residuals center on zero") {
  RegressionConfig cfg;
  cfg.n = 40000;
  cfg.contamination = RegressionConfig::Contamination::None;
  cfg.seed = 13;
  const auto d = emglab::gen_regression(cfg);
  double resid = 0.0;
  for (std::size_t i = 0; i < d.x.size(); ++i)
    resid += d.y[i] - emglab::kTrueSlope * d.x[i] - emglab::kTrueIntercept;
  resid /= static_cast<double>(d.x.size());
  CHECK(std::fabs(resid) <= 5.0 * 0.5 / std::sqrt(40000.0));
}

TEST_CASE("mean contaminated residual matches the contaminant expectation") {
  RegressionConfig cfg;
  cfg.n = 1 << 16;
  cfg.seed = 5;
  SUBCASE("exponential rate 1/2: mean residual 0.25 * 2 = 0.5") {
    const auto d = emglab::gen_regression(cfg);
    double resid = 0.0;
    for (std::size_t i = 0; i < d.x.size(); ++i)
      resid += d.y[i] - emglab::kTrueSlope * d.x[i] - emglab::kTrueIntercept;
    resid /= static_cast<double>(d.x.size());
    CHECK(resid == doctest::Approx(0.5).epsilon(0.05));
  }
  SUBCASE("lognormal(0,1): mean residual 0.25 * exp(1/2)") {
    cfg.contamination = RegressionConfig::Contamination::LogNormal;
    const auto d = emglab::gen_regression(cfg);
    double resid = 0.0;
    for (std::size_t i = 0; i < d.x.size(); ++i)
      resid += d.y[i] - emglab::kTrueSlope * d.x[i] - emglab::kTrueIntercept;
    resid /= static_cast<double>(d.x.size());
    CHECK(resid == doctest::Approx(0.25 * std::exp(0.5)).epsilon(0.08));
  }
  SUBCASE("contaminated points carry positive extra mass on average") {
    const auto d = emglab::gen_regression(cfg);
    double cont = 0.0, clean = 0.0;
    std::size_t nc = 0, nu = 0;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
      const double r = d.y[i] - emglab::kTrueSlope * d.x[i] - emglab::kTrueIntercept;
      if (d.contaminated[i]) {
        cont += r;
        ++nc;
      } else {
        clean += r;
        ++nu;
      }
    }
    CHECK(cont / nc > 1.0);  // Exp(rate .5) mean = 2
    CHECK(std::fabs(clean / nu) < 0.02);
  }
}

TEST_CASE("every method recovers a noiseless line") {
  RegressionConfig cfg;
  cfg.n = 128;
  cfg.noise_sigma = 0.0;
  cfg.contamination = RegressionConfig::Contamination::None;
  cfg.seed = 3;
  const auto d = emglab::gen_regression(cfg);
  emglab::FitOptions opts;
  opts.max_em_iters = 300;
  opts.loglik_rel_tol = 1e-14;
  for (const auto& m : {FitMethod::l2(), FitMethod::l1(), FitMethod::huber(0.2),
                        FitMethod::pinball(0.2), FitMethod::emgm()}) {
    const auto f = emglab::fit_line(d.x, d.y, m, opts);
    CAPTURE(m.name());
    CHECK(f.a == doctest::Approx(emglab::kTrueSlope).epsilon(1e-6));
    CHECK(f.b == doctest::Approx(emglab::kTrueIntercept).epsilon(1e-6));
  }
}

TEST_CASE("fit_line rejects degenerate x") {
  const Vec x(10, 0.7), y(10, 1.0);
  emglab::FitOptions opts;
  CHECK_THROWS_AS(emglab::fit_line(x, y, FitMethod::l2(), opts), emglab::FitError);
}

TEST_CASE("EMGM line sits below L1/Huber on exponentially contaminated data") {
  RegressionConfig cfg;
  cfg.n = 4096;
  cfg.seed = 21;
  const auto d = emglab::gen_regression(cfg);
  emglab::FitOptions opts;
  const auto emgm = emglab::fit_line(d.x, d.y, FitMethod::emgm(), opts);
  const auto l1 = emglab::fit_line(d.x, d.y, FitMethod::l1(), opts);
  const auto huber = emglab::fit_line(d.x, d.y, FitMethod::huber(0.2), opts);
  CHECK(emgm.b < l1.b);
  CHECK(emgm.b < huber.b);
  CHECK(std::fabs(emgm.b - emglab::kTrueIntercept) < std::fabs(l1.b - emglab::kTrueIntercept));
}

TEST_CASE("run_trials signs follow the truth-minus-estimate convention") {
  RegressionConfig cfg;
  cfg.seed = 11;
  emglab::FitOptions opts;
  const std::vector<FitMethod> methods{FitMethod::l2(), FitMethod::pinball(0.2)};
  const auto table = emglab::run_trials(cfg, methods, 8, {1024}, opts, 2);
  const auto& l2 = table.stats[0][0];
  const auto& pb = table.stats[0][1];
  CHECK(l2.mean_b < -0.3);  // positive contamination biases b-hat up, error negative
  CHECK(pb.mean_b > 0.1);
  CHECK(l2.std_b >= 0.0);
  CHECK(l2.mae_b >= 0.0);
  CHECK(table.records.size() == 2 * 8);

  // Aggregation is deterministic across thread counts.
  const auto table1 = emglab::run_trials(cfg, methods, 8, {1024}, opts, 1);
  CHECK(table1.stats[0][0].mean_b == l2.mean_b);
  CHECK(table1.stats[0][1].mae_b == pb.mae_b);
}

TEST_CASE("huber and l1 MAE curves flatten near the Table-1 bias magnitude") {
  RegressionConfig cfg;
  cfg.seed = 77;
  emglab::FitOptions opts;
  const auto curve =
      emglab::mae_curve(cfg, {FitMethod::huber(0.2), FitMethod::l1()}, {4096}, 8, opts, 2);
  for (std::size_t mi = 0; mi < 2; ++mi) {
    CAPTURE(mi);
    CHECK(curve[mi][0] == doctest::Approx(0.16).epsilon(0.25));
  }
}

TEST_CASE("mae_curve emits one row per method") {
  RegressionConfig cfg;
  cfg.seed = 6;
  emglab::FitOptions opts;
  const auto curve = emglab::mae_curve(cfg, {FitMethod::l2()}, {256, 512}, 4, opts, 2);
  REQUIRE(curve.size() == 1);
  REQUIRE(curve[0].size() == 2);
  CHECK(curve[0][0] > 0.0);
}
