#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "emglab/csv.hpp"
#include "emglab/report.hpp"
#include "emglab/sampling.hpp"
#include "emglab/svg.hpp"

using emglab::Vec;

namespace {

std::string tmp_path(const std::string& name) { return "/tmp/emglab_test_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t count = 0, pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("csv: tiny literal file") {
  const std::string path = tmp_path("tiny.csv");
  {
    std::ofstream out(path);
    out << "0,1.0\n1,2.0\n2,3.0\n";
  }
  const auto ds = emglab::read_matrix_csv(path);
  REQUIRE(ds.n() == 3);
  REQUIRE(ds.m() == 1);
  CHECK(ds.grid == Vec{0.0, 1.0, 2.0});
  CHECK(ds.s(0, 0) == 1.0);
  CHECK(ds.s(2, 0) == 3.0);
}

TEST_CASE("csv: empty cells become unobserved entries; header detected") {
  const std::string path = tmp_path("mask.csv");
  {
    std::ofstream out(path);
    out << "grid,a,b\n0,1.0,\n1,,2.5\n";
  }
  const auto ds = emglab::read_matrix_csv(path);
  REQUIRE(ds.n() == 2);
  REQUIRE(ds.m() == 2);
  CHECK(ds.observed(0, 0));
  CHECK(!ds.observed(0, 1));
  CHECK(!ds.observed(1, 0));
  CHECK(ds.observed(1, 1));
}

TEST_CASE("csv: ragged rows raise a parse error carrying the row number") {
  const std::string path = tmp_path("ragged.csv");
  {
    std::ofstream out(path);
    out << "0,1.0\n1,2.0,9.9\n";
  }
  try {
    emglab::read_matrix_csv(path);
    FAIL("expected ParseError");
  } catch (const emglab::ParseError& e) {
    CHECK(e.row() == 2);
  }
}

TEST_CASE("csv: zero data columns rejected") {
  const std::string path = tmp_path("onecol.csv");
  {
    std::ofstream out(path);
    out << "0\n1\n";
  }
  CHECK_THROWS_AS(emglab::read_matrix_csv(path), emglab::ParseError);
}

TEST_CASE("csv round trip is bit-exact") {
  emglab::SeededRng rng(2718);
  emglab::SpectroDataset ds;
  const std::size_t n = 40, m = 5;
  ds.grid.resize(n);
  ds.s = emglab::Matrix(n, m);
  ds.mask.assign(n * m, 1);
  for (std::size_t i = 0; i < n; ++i) ds.grid[i] = rng.uniform(-5.0, 5.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      ds.s(i, j) = rng.normal(0.0, 1.0) * std::pow(10.0, rng.uniform(-8.0, 8.0));
      if (rng.uniform() < 0.1) ds.mask[i * m + j] = 0;
    }
  const std::string path = tmp_path("roundtrip.csv");
  emglab::write_matrix_csv(path, ds);
  const auto back = emglab::read_matrix_csv(path);
  REQUIRE(back.n() == n);
  REQUIRE(back.m() == m);
  CHECK(back.grid == ds.grid);
  CHECK(back.mask == ds.mask);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (ds.mask[i * m + j]) CHECK(back.s(i, j) == ds.s(i, j));
}

TEST_CASE("json report: schema field, numeric round trip, empty records") {
  emglab::FitReport rep;
  rep.kind = "bench-regression";
  rep.config = {{"seed", 7}, {"sizes", {256, 1024}}};
  rep.results = {{"records", nlohmann::json::array()},
                 {"values", {0.1234567890123456789, -1e-300, 3.9e18}}};
  const std::string path = tmp_path("report.json");
  emglab::write_report_json(rep, path);

  const auto back = emglab::read_report_json(path);
  CHECK(back["schema"] == emglab::kReportSchema);
  CHECK(back["results"]["records"].is_array());
  CHECK(back["results"]["records"].empty());
  for (std::size_t i = 0; i < 3; ++i) {
    const double orig = rep.results["values"][i].get<double>();
    const double rt = back["results"]["values"][i].get<double>();
    CHECK(rt == orig);  // nlohmann round-trips doubles exactly
  }
}

TEST_CASE("svg: one polyline per line series, deterministic bytes") {
  emglab::PlotSeries line{"fit", {0.0, 1.0}, {0.5, 0.7}, emglab::PlotSeries::Style::Line};
  const std::string path1 = tmp_path("plot1.svg");
  const std::string path2 = tmp_path("plot2.svg");
  emglab::emit_plot_svg({line}, path1, {.title = "demo", .xlabel = "x", .ylabel = "y"});
  emglab::emit_plot_svg({line}, path2, {.title = "demo", .xlabel = "x", .ylabel = "y"});
  const std::string svg1 = slurp(path1);
  CHECK(svg1 == slurp(path2));
  CHECK(count_occurrences(svg1, "<polyline") == 1);

  emglab::PlotSeries scatter{"data", {0.0, 0.5, 1.0}, {1.0, 0.2, 0.4},
                             emglab::PlotSeries::Style::Scatter};
  const std::string path3 = tmp_path("plot3.svg");
  emglab::emit_plot_svg({scatter, line, line}, path3, {});
  const std::string svg3 = slurp(path3);
  CHECK(count_occurrences(svg3, "<polyline") == 2);
  CHECK(count_occurrences(svg3, "<circle") == 3);

  CHECK_THROWS_AS(emglab::emit_plot_svg({}, tmp_path("none.svg"), {}), emglab::DomainError);
  emglab::PlotSeries empty{"e", {}, {}, emglab::PlotSeries::Style::Line};
  CHECK_THROWS_AS(emglab::emit_plot_svg({empty}, tmp_path("none.svg"), {}), emglab::DomainError);
}
