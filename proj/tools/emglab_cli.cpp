// emglab command-line front end: data generation, fits, benchmarks, and
// static SVG plots. Every subcommand echoes its resolved configuration and
// writes reproducible reports keyed by the master seed.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emglab/emglab.hpp"

namespace {

using emglab::FitMethod;
using emglab::Vec;
using nlohmann::json;

FitMethod parse_method(const std::string& token, double delta, double q) {
  auto starts = [&](const char* p) { return token.rfind(p, 0) == 0; };
  if (token == "l2") return FitMethod::l2();
  if (token == "l1") return FitMethod::l1();
  if (token == "emgm") return FitMethod::emgm();
  if (token == "huber") return FitMethod::huber(delta);
  if (token == "pinball" || token == "quantile") return FitMethod::pinball(q);
  if (starts("huber:")) return FitMethod::huber(std::stod(token.substr(6)));
  if (starts("pinball:")) return FitMethod::pinball(std::stod(token.substr(8)));
  if (starts("quantile:")) return FitMethod::pinball(std::stod(token.substr(9)));
  throw CLI::ValidationError("unknown method '" + token + "'");
}

std::vector<FitMethod> parse_methods(const std::string& csv, double delta, double q) {
  std::vector<FitMethod> out;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(parse_method(cur, delta, q));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (out.empty()) throw CLI::ValidationError("no methods given");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> out;
  std::string cur;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(static_cast<std::size_t>(std::stoull(cur)));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (out.empty()) throw CLI::ValidationError("no sizes given");
  return out;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void echo_config(const json& cfg) { std::cout << "config: " << cfg.dump() << "\n"; }

emglab::RegressionConfig::Contamination parse_contamination(const std::string& s) {
  if (s == "none") return emglab::RegressionConfig::Contamination::None;
  if (s == "exp" || s == "exponential") return emglab::RegressionConfig::Contamination::Exponential;
  if (s == "lognormal" || s == "log-normal") return emglab::RegressionConfig::Contamination::LogNormal;
  throw CLI::ValidationError("unknown contamination '" + s + "'");
}

json regression_config_json(const emglab::RegressionConfig& cfg) {
  const char* names[] = {"none", "exp", "lognormal"};
  return {{"n", cfg.n},
          {"contamination", names[static_cast<int>(cfg.contamination)]},
          {"rate", cfg.rate},
          {"ln_mu", cfg.ln_mu},
          {"ln_sigma", cfg.ln_sigma},
          {"contaminated_fraction", cfg.contaminated_fraction},
          {"noise_sigma", cfg.noise_sigma},
          {"x_distribution", "uniform(0,1)"},
          {"slope_true", emglab::kTrueSlope},
          {"intercept_true", emglab::kTrueIntercept},
          {"seed", cfg.seed}};
}

json spectra_config_json(const emglab::SpectraGenConfig& cfg) {
  return {{"n", cfg.n},         {"m", cfg.m},
          {"k", cfg.k},         {"min_peaks", cfg.min_peaks},
          {"max_peaks", cfg.max_peaks}, {"min_peak_width", cfg.min_peak_width},
          {"max_peak_width", cfg.max_peak_width}, {"peak_amp_mean", cfg.peak_amp_mean},
          {"lorentzian_fraction", cfg.lorentzian_fraction}, {"noise_sigma", cfg.noise_sigma},
          {"background_smoothness", cfg.background_smoothness},
          {"min_activation", cfg.min_activation}, {"max_activation", cfg.max_activation},
          {"hidden_fraction", cfg.hidden_fraction}, {"seed", cfg.seed}};
}

void add_fit_option_flags(CLI::App* cmd, emglab::FitOptions& opts) {
  cmd->add_option("--max-em-iters", opts.max_em_iters, "EM / outer iteration cap");
  cmd->add_option("--max-inner-iters", opts.max_inner_iters, "descent steps per M-step phase");
  cmd->add_option("--rel-tol", opts.loglik_rel_tol, "relative convergence tolerance");
}

// ---------------------------------------------------------------------------

int cmd_gen_regression(const emglab::RegressionConfig& cfg, const std::string& out_path) {
  echo_config(regression_config_json(cfg));
  const auto d = emglab::gen_regression(cfg);
  emglab::SpectroDataset ds;
  ds.grid = d.x;
  ds.s = emglab::Matrix(d.x.size(), 2);
  ds.mask.assign(d.x.size() * 2, 1);
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    ds.s(i, 0) = d.y[i];
    ds.s(i, 1) = static_cast<double>(d.contaminated[i]);
  }
  emglab::write_matrix_csv(out_path, ds, {"y", "contaminated"});
  std::cout << "wrote " << out_path << " (" << d.x.size() << " rows)\n";
  return 0;
}

int cmd_fit_regression(const emglab::RegressionConfig& cfg, const std::string& in_path,
                       const std::string& methods_csv, double delta, double q,
                       const emglab::FitOptions& opts, const std::string& out_path,
                       const std::string& plot_path) {
  Vec x, y;
  json cfg_json;
  if (!in_path.empty()) {
    const auto ds = emglab::read_matrix_csv(in_path);
    x = ds.grid;
    y.resize(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) y[i] = ds.s(i, 0);
    cfg_json = {{"in", in_path}};
  } else {
    const auto d = emglab::gen_regression(cfg);
    x = d.x;
    y = d.y;
    cfg_json = regression_config_json(cfg);
  }
  const auto methods = parse_methods(methods_csv, delta, q);
  cfg_json["methods"] = methods_csv;
  echo_config(cfg_json);

  Timer timer;
  json fits = json::array();
  std::vector<emglab::LineFit> line_fits;
  for (const auto& m : methods) {
    const auto f = emglab::fit_line(x, y, m, opts);
    json jf = emglab::fit_result_to_json(f.fit, false);
    jf["method"] = m.name();
    jf["a"] = f.a;
    jf["b"] = f.b;
    jf["err_a"] = emglab::kTrueSlope - f.a;
    jf["err_b"] = emglab::kTrueIntercept - f.b;
    fits.push_back(jf);
    line_fits.push_back(f);
    std::cout << m.name() << ": a=" << f.a << " b=" << f.b << "\n";
  }

  if (!out_path.empty()) {
    emglab::FitReport rep;
    rep.kind = "fit-regression";
    rep.config = cfg_json;
    rep.results = {{"fits", fits}};
    emglab::write_report_json(rep, out_path);
    std::cout << "wrote " << out_path << "\n";
  }
  if (!plot_path.empty()) {
    std::vector<emglab::PlotSeries> series;
    series.push_back({"data", x, y, emglab::PlotSeries::Style::Scatter});
    double xlo = x[0], xhi = x[0];
    for (double v : x) {
      xlo = std::min(xlo, v);
      xhi = std::max(xhi, v);
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const auto& f = line_fits[i];
      series.push_back({methods[i].name(),
                        {xlo, xhi},
                        {f.a * xlo + f.b, f.a * xhi + f.b},
                        emglab::PlotSeries::Style::Line});
    }
    emglab::emit_plot_svg(series, plot_path, {.title = "regression fits", .xlabel = "x", .ylabel = "y"});
    std::cout << "wrote " << plot_path << "\n";
  }
  std::cout << "elapsed_seconds: " << timer.seconds() << "\n";
  return 0;
}

int cmd_bench_regression(const emglab::RegressionConfig& base, const std::string& sizes_csv,
                         std::size_t reps, const std::string& methods_csv, double delta, double q,
                         const emglab::FitOptions& opts, unsigned threads,
                         const std::string& out_path, bool include_records) {
  const auto sizes = parse_sizes(sizes_csv);
  const auto methods = parse_methods(methods_csv, delta, q);
  json cfg_json = regression_config_json(base);
  cfg_json["sizes"] = sizes;
  cfg_json["reps"] = reps;
  cfg_json["methods"] = methods_csv;
  cfg_json["threads"] = threads;
  echo_config(cfg_json);

  Timer timer;
  const auto table = emglab::run_trials(base, methods, reps, sizes, opts, threads);
  emglab::FitReport rep;
  rep.kind = "bench-regression";
  rep.config = cfg_json;
  rep.results = emglab::trial_table_to_json(table, include_records);
  emglab::write_report_json(rep, out_path);
  std::cout << "wrote " << out_path << "\n";
  std::cout << "elapsed_seconds: " << timer.seconds() << "\n";
  return 0;
}

int cmd_gen_spectra(const emglab::SpectraGenConfig& cfg, const std::string& out_path,
                    const std::string& truth_path) {
  echo_config(spectra_config_json(cfg));
  const auto ds = emglab::gen_spectra(cfg);
  emglab::write_matrix_csv(out_path, ds);
  std::cout << "wrote " << out_path << " (" << ds.n() << "x" << ds.m() << ")\n";
  if (!truth_path.empty()) {
    emglab::SpectroDataset truth;
    truth.grid = ds.grid;
    truth.s = *ds.truth_b;
    truth.mask.assign(ds.n() * ds.m(), 1);
    emglab::write_matrix_csv(truth_path, truth);
    std::cout << "wrote " << truth_path << "\n";
  }
  return 0;
}

int cmd_fit_background(const std::string& in_path, std::size_t k, const std::string& objective,
                       double delta, double q, emglab::PmfOptions opts, std::uint64_t seed,
                       const std::string& truth_path, const std::string& out_path,
                       const std::string& bg_path) {
  const auto ds = emglab::read_matrix_csv(in_path);
  const FitMethod method = parse_method(objective, delta, q);
  json cfg_json = {{"in", in_path},       {"k", k},
                   {"objective", method.name()}, {"lengthscale", opts.lengthscale},
                   {"rkhs_tol", opts.rkhs_tol},  {"init_quantile", opts.init_quantile},
                   {"sigma_prior_factor", opts.sigma_prior_factor}, {"seed", seed}};
  echo_config(cfg_json);

  Timer timer;
  const auto bg = emglab::fit_background(ds, k, method, opts, seed);
  const emglab::Matrix b = bg.model.background();

  emglab::FitReport rep;
  rep.kind = "fit-background";
  rep.config = cfg_json;
  rep.results = {{"fit", emglab::fit_result_to_json(bg.fit, false)},
                 {"rkhs_rank", bg.model.w.cols()}};
  if (!truth_path.empty()) {
    const auto truth = emglab::read_matrix_csv(truth_path);
    const auto err = emglab::background_errors(b, truth.s);
    rep.results["errors"] = {{"mean_l2", err.mean_l2}, {"std_l2", err.std_l2},
                             {"mean_l1", err.mean_l1}, {"std_l1", err.std_l1}};
    std::cout << "mean_l2=" << err.mean_l2 << " mean_l1=" << err.mean_l1 << "\n";
  }
  if (!out_path.empty()) {
    emglab::write_report_json(rep, out_path);
    std::cout << "wrote " << out_path << "\n";
  }
  if (!bg_path.empty()) {
    emglab::SpectroDataset out_ds;
    out_ds.grid = ds.grid;
    out_ds.s = b;
    out_ds.mask.assign(b.rows() * b.cols(), 1);
    emglab::write_matrix_csv(bg_path, out_ds);
    std::cout << "wrote " << bg_path << "\n";
  }
  std::cout << "elapsed_seconds: " << timer.seconds() << "\n";
  return 0;
}

int cmd_bench_pmf(emglab::SpectraGenConfig gen_cfg, std::size_t datasets,
                  const std::string& m_csv, const std::string& objectives_csv, double delta,
                  double q, const emglab::PmfOptions& opts, unsigned threads,
                  const std::string& out_path) {
  const auto m_values = parse_sizes(m_csv);
  const auto methods = parse_methods(objectives_csv, delta, q);
  json cfg_json = spectra_config_json(gen_cfg);
  cfg_json["datasets"] = datasets;
  cfg_json["m_values"] = m_values;
  cfg_json["objectives"] = objectives_csv;
  cfg_json["lengthscale"] = opts.lengthscale;
  cfg_json["rkhs_tol"] = opts.rkhs_tol;
  cfg_json["threads"] = threads;
  echo_config(cfg_json);

  Timer timer;
  // One kernel eigendecomposition per grid, shared across datasets.
  Vec grid(gen_cfg.n);
  for (std::size_t i = 0; i < gen_cfg.n; ++i) grid[i] = static_cast<double>(i);
  const emglab::Matrix w = emglab::rkhs_projector(emglab::rbf_kernel(grid, opts.lengthscale),
                                                  opts.rkhs_tol);
  std::cout << "rkhs rank: " << w.cols() << " of " << gen_cfg.n << "\n";

  json per_m = json::array();
  for (std::size_t m_val : m_values) {
    struct CellErr {
      double mean_l2, std_l2, mean_l1, std_l1;
    };
    std::vector<std::vector<CellErr>> errs(datasets, std::vector<CellErr>(methods.size()));

    emglab::parallel_for(datasets, threads, [&](std::size_t d) {
      emglab::SpectraGenConfig cfg = gen_cfg;
      cfg.m = m_val;
      cfg.seed = emglab::derive_seed(gen_cfg.seed, m_val, d);
      const auto ds = emglab::gen_spectra(cfg, &w);
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const auto bg = emglab::fit_background(ds, gen_cfg.k, methods[mi], opts,
                                               emglab::derive_seed(cfg.seed, 1000 + mi), &w);
        const auto e = emglab::background_errors(bg.model.background(), *ds.truth_b);
        errs[d][mi] = {e.mean_l2, e.std_l2, e.mean_l1, e.std_l1};
      }
    });

    json per_objective = json::array();
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      Vec l2s(datasets), l1s(datasets);
      for (std::size_t d = 0; d < datasets; ++d) {
        l2s[d] = errs[d][mi].mean_l2;
        l1s[d] = errs[d][mi].mean_l1;
      }
      per_objective.push_back({{"objective", methods[mi].name()},
                               {"mean_l2", emglab::mean(l2s)},
                               {"std_l2", emglab::sample_std(l2s)},
                               {"mean_l1", emglab::mean(l1s)},
                               {"std_l1", emglab::sample_std(l1s)}});
      std::cout << "m=" << m_val << " " << methods[mi].name() << ": mean_l2=" << emglab::mean(l2s)
                << " mean_l1=" << emglab::mean(l1s) << "\n";
    }
    json per_dataset = json::array();
    for (std::size_t d = 0; d < datasets; ++d) {
      json row = {{"dataset", d}};
      json cells = json::array();
      for (std::size_t mi = 0; mi < methods.size(); ++mi)
        cells.push_back({{"objective", methods[mi].name()},
                         {"mean_l2", errs[d][mi].mean_l2},
                         {"mean_l1", errs[d][mi].mean_l1}});
      row["errors"] = cells;
      per_dataset.push_back(row);
    }
    per_m.push_back({{"m", m_val}, {"per_objective", per_objective}, {"per_dataset", per_dataset}});
  }

  emglab::FitReport rep;
  rep.kind = "bench-pmf";
  rep.config = cfg_json;
  rep.results = {{"per_m", per_m}, {"rkhs_rank", w.cols()}};
  emglab::write_report_json(rep, out_path);
  std::cout << "wrote " << out_path << "\n";
  std::cout << "elapsed_seconds: " << timer.seconds() << "\n";
  return 0;
}

int cmd_imodpoly(const std::string& in_path, std::size_t degree, std::size_t max_iter, long col,
                 const std::string& out_path) {
  const auto ds = emglab::read_matrix_csv(in_path);
  echo_config({{"in", in_path}, {"degree", degree}, {"max_iter", max_iter}, {"col", col}});
  const std::size_t lo = col < 0 ? 0 : static_cast<std::size_t>(col);
  const std::size_t hi = col < 0 ? ds.m() : static_cast<std::size_t>(col) + 1;
  if (hi > ds.m()) throw emglab::DomainError("imodpoly: column out of range");
  emglab::Matrix bg(ds.n(), hi - lo);
  for (std::size_t j = lo; j < hi; ++j) {
    Vec y(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) y[i] = ds.s(i, j);
    const Vec b = emglab::imodpoly(y, degree, max_iter);
    for (std::size_t i = 0; i < ds.n(); ++i) bg(i, j - lo) = b[i];
  }
  emglab::SpectroDataset out_ds;
  out_ds.grid = ds.grid;
  out_ds.s = bg;
  out_ds.mask.assign(bg.rows() * bg.cols(), 1);
  emglab::write_matrix_csv(out_path, out_ds);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_plot(const std::string& in_path, const std::string& out_path, const std::string& kind,
             long col) {
  echo_config({{"in", in_path}, {"out", out_path}, {"kind", kind}, {"col", col}});
  const bool is_json = in_path.size() > 5 && in_path.substr(in_path.size() - 5) == ".json";
  std::vector<emglab::PlotSeries> series;
  emglab::PlotLayout layout;
  if (is_json) {
    const json rep = emglab::read_report_json(in_path);
    const std::string rep_kind = rep.value("kind", "");
    if (kind == "mae" || (kind == "auto" && rep_kind == "bench-regression")) {
      // MAE of b vs N, one series per method.
      const auto& stats = rep["results"]["stats"];
      std::vector<std::string> methods;
      for (const auto& cell : stats) {
        const std::string m = cell["method"];
        bool found = false;
        for (const auto& known : methods) found |= known == m;
        if (!found) methods.push_back(m);
      }
      for (const auto& m : methods) {
        emglab::PlotSeries s;
        s.label = m;
        for (const auto& cell : stats) {
          if (cell["method"] != m) continue;
          s.x.push_back(cell["size"].get<double>());
          s.y.push_back(cell["mae_b"].get<double>());
        }
        series.push_back(s);
      }
      layout = {.title = "MAE of b vs data size", .xlabel = "N", .ylabel = "MAE b",
                .log_x = true, .log_y = true};
    } else if (kind == "trace" || kind == "auto") {
      // Log-likelihood / objective trace of the first fit found.
      json trace;
      if (rep["results"].contains("fit")) trace = rep["results"]["fit"]["trace"];
      else if (rep["results"].contains("fits")) trace = rep["results"]["fits"][0]["trace"];
      else throw emglab::DomainError("plot: no trace in report");
      emglab::PlotSeries s;
      s.label = "trace";
      for (std::size_t i = 0; i < trace.size(); ++i) {
        s.x.push_back(static_cast<double>(i));
        s.y.push_back(trace[i].get<double>());
      }
      series.push_back(s);
      layout = {.title = "fit trace", .xlabel = "iteration", .ylabel = "value"};
    } else {
      throw emglab::DomainError("plot: unsupported kind '" + kind + "' for JSON input");
    }
  } else {
    const auto ds = emglab::read_matrix_csv(in_path);
    const std::size_t lo = col < 0 ? 0 : static_cast<std::size_t>(col);
    const std::size_t hi = col < 0 ? std::min(ds.m(), lo + 6) : lo + 1;
    for (std::size_t j = lo; j < hi && j < ds.m(); ++j) {
      emglab::PlotSeries s;
      s.label = "col " + std::to_string(j);
      for (std::size_t i = 0; i < ds.n(); ++i) {
        if (!ds.observed(i, j)) continue;
        s.x.push_back(ds.grid[i]);
        s.y.push_back(ds.s(i, j));
      }
      series.push_back(s);
    }
    layout = {.title = "spectra", .xlabel = "channel", .ylabel = "intensity"};
  }
  emglab::emit_plot_svg(series, out_path, layout);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMG mixture lab: robust regression and spectroscopic background inference"};
  app.require_subcommand(1);

  // --- gen-regression ---
  emglab::RegressionConfig reg_cfg;
  std::string contamination = "exp";
  std::string out_path, in_path, plot_path, truth_path, bg_path;
  std::string methods_csv = "l2,huber,l1,pinball,emgm";
  std::string sizes_csv = "256,1024,4096,16384";
  std::string objectives_csv = "l2,l1,pinball:0.3,pinball:0.2,emgm";
  std::string m_csv = "64";
  std::string plot_kind = "auto";
  double delta = 0.2, q = 0.2;
  std::size_t reps = 32, datasets = 8, degree = 5, max_iter = 100, k = 2;
  long col = -1;
  unsigned threads = emglab::default_thread_count();
  emglab::FitOptions fit_opts;
  emglab::PmfOptions pmf_opts;
  bool no_records = false;
  std::uint64_t seed = 0;

  auto* genreg = app.add_subcommand("gen-regression", "generate a contaminated regression dataset");
  genreg->add_option("--n", reg_cfg.n, "number of points");
  genreg->add_option("--contamination", contamination, "none|exp|lognormal");
  genreg->add_option("--rate", reg_cfg.rate, "exponential contaminant rate");
  genreg->add_option("--ln-mu", reg_cfg.ln_mu, "log-normal mu");
  genreg->add_option("--ln-sigma", reg_cfg.ln_sigma, "log-normal sigma");
  genreg->add_option("--frac", reg_cfg.contaminated_fraction, "contaminated fraction");
  genreg->add_option("--noise-sigma", reg_cfg.noise_sigma, "Gaussian noise sigma");
  genreg->add_option("--seed", seed, "master seed")->required();
  genreg->add_option("--out", out_path, "output CSV")->required();

  // --- fit-regression ---
  auto* fitreg = app.add_subcommand("fit-regression", "fit a line under one or more objectives");
  fitreg->add_option("--in", in_path, "input CSV (x in the grid column, y first data column)");
  fitreg->add_option("--n", reg_cfg.n, "points to generate when no --in is given");
  fitreg->add_option("--contamination", contamination, "none|exp|lognormal");
  fitreg->add_option("--rate", reg_cfg.rate, "exponential contaminant rate");
  fitreg->add_option("--ln-mu", reg_cfg.ln_mu, "log-normal mu");
  fitreg->add_option("--ln-sigma", reg_cfg.ln_sigma, "log-normal sigma");
  fitreg->add_option("--frac", reg_cfg.contaminated_fraction, "contaminated fraction");
  fitreg->add_option("--noise-sigma", reg_cfg.noise_sigma, "Gaussian noise sigma");
  auto* fitreg_seed = fitreg->add_option("--seed", seed, "master seed (required when generating)");
  fitreg->add_option("--methods", methods_csv, "comma list: l2,l1,huber[,:d],pinball[:q],emgm");
  fitreg->add_option("--delta", delta, "Huber delta");
  fitreg->add_option("--q", q, "pinball quantile");
  fitreg->add_option("--out", out_path, "JSON report path");
  fitreg->add_option("--plot", plot_path, "SVG plot path");
  add_fit_option_flags(fitreg, fit_opts);

  // --- bench-regression ---
  auto* benchreg = app.add_subcommand("bench-regression", "Monte Carlo regression benchmark");
  benchreg->add_option("--contamination", contamination, "none|exp|lognormal");
  benchreg->add_option("--rate", reg_cfg.rate, "exponential contaminant rate");
  benchreg->add_option("--ln-mu", reg_cfg.ln_mu, "log-normal mu");
  benchreg->add_option("--ln-sigma", reg_cfg.ln_sigma, "log-normal sigma");
  benchreg->add_option("--frac", reg_cfg.contaminated_fraction, "contaminated fraction");
  benchreg->add_option("--noise-sigma", reg_cfg.noise_sigma, "Gaussian noise sigma");
  benchreg->add_option("--sizes", sizes_csv, "comma list of data sizes");
  benchreg->add_option("--reps", reps, "realizations per size");
  benchreg->add_option("--methods", methods_csv, "comma list of methods");
  benchreg->add_option("--delta", delta, "Huber delta");
  benchreg->add_option("--q", q, "pinball quantile");
  benchreg->add_option("--threads", threads, "worker threads");
  benchreg->add_flag("--no-records", no_records, "omit per-trial records from the report");
  benchreg->add_option("--seed", seed, "master seed")->required();
  benchreg->add_option("--out", out_path, "JSON report path")->required();
  add_fit_option_flags(benchreg, fit_opts);

  // --- gen-spectra ---
  emglab::SpectraGenConfig spectra_cfg;
  auto* genspectra = app.add_subcommand("gen-spectra", "generate synthetic spectra");
  genspectra->add_option("--n", spectra_cfg.n, "channels per spectrogram");
  genspectra->add_option("--m", spectra_cfg.m, "number of spectrograms");
  genspectra->add_option("--k", spectra_cfg.k, "background rank");
  genspectra->add_option("--min-peaks", spectra_cfg.min_peaks, "minimum peaks per spectrogram");
  genspectra->add_option("--max-peaks", spectra_cfg.max_peaks, "maximum peaks per spectrogram");
  genspectra->add_option("--min-peak-width", spectra_cfg.min_peak_width, "minimum peak width");
  genspectra->add_option("--max-peak-width", spectra_cfg.max_peak_width, "maximum peak width");
  genspectra->add_option("--amp-mean", spectra_cfg.peak_amp_mean, "mean exponential peak amplitude");
  genspectra->add_option("--lorentz-frac", spectra_cfg.lorentzian_fraction, "Lorentzian peak fraction");
  genspectra->add_option("--noise-sigma", spectra_cfg.noise_sigma, "Gaussian noise sigma");
  genspectra->add_option("--bg-smooth", spectra_cfg.background_smoothness, "background smoothness");
  genspectra->add_option("--hide-frac", spectra_cfg.hidden_fraction, "fraction of entries to mask");
  genspectra->add_option("--seed", seed, "master seed")->required();
  genspectra->add_option("--out", out_path, "output CSV")->required();
  genspectra->add_option("--truth", truth_path, "ground-truth background CSV");

  // --- fit-background ---
  std::string objective = "emgm";
  auto* fitbg = app.add_subcommand("fit-background", "low-rank background fit on a spectra CSV");
  fitbg->add_option("--in", in_path, "input spectra CSV")->required();
  fitbg->add_option("--k", k, "background rank")->required();
  fitbg->add_option("--objective", objective, "l2|l1|huber[:d]|pinball[:q]|emgm");
  fitbg->add_option("--delta", delta, "Huber delta");
  fitbg->add_option("--q", q, "pinball quantile");
  fitbg->add_option("--lengthscale", pmf_opts.lengthscale, "RBF kernel lengthscale");
  fitbg->add_option("--rkhs-tol", pmf_opts.rkhs_tol, "relative eigenvalue cutoff");
  fitbg->add_option("--init-quantile", pmf_opts.init_quantile, "quantile for the EMGM init fit");
  fitbg->add_option("--sigma-prior-factor", pmf_opts.sigma_prior_factor,
                    "half-Normal prior scale as a fraction of the column max");
  fitbg->add_option("--seed", seed, "master seed")->required();
  fitbg->add_option("--truth", truth_path, "ground-truth background CSV for error metrics");
  fitbg->add_option("--out", out_path, "JSON report path");
  fitbg->add_option("--bg-out", bg_path, "fitted background CSV path");
  add_fit_option_flags(fitbg, pmf_opts.fit);

  // --- bench-pmf ---
  auto* benchpmf = app.add_subcommand("bench-pmf", "multi-dataset background benchmark");
  benchpmf->add_option("--datasets", datasets, "datasets per m value");
  benchpmf->add_option("--n", spectra_cfg.n, "channels per spectrogram");
  benchpmf->add_option("--m", m_csv, "comma list of spectrogram counts");
  benchpmf->add_option("--k", spectra_cfg.k, "background rank");
  benchpmf->add_option("--min-peaks", spectra_cfg.min_peaks, "minimum peaks per spectrogram");
  benchpmf->add_option("--max-peaks", spectra_cfg.max_peaks, "maximum peaks per spectrogram");
  benchpmf->add_option("--amp-mean", spectra_cfg.peak_amp_mean, "mean exponential peak amplitude");
  benchpmf->add_option("--noise-sigma", spectra_cfg.noise_sigma, "Gaussian noise sigma");
  benchpmf->add_option("--bg-smooth", spectra_cfg.background_smoothness, "background smoothness");
  benchpmf->add_option("--objectives", objectives_csv, "comma list of objectives");
  benchpmf->add_option("--delta", delta, "Huber delta");
  benchpmf->add_option("--q", q, "pinball quantile");
  benchpmf->add_option("--lengthscale", pmf_opts.lengthscale, "RBF kernel lengthscale");
  benchpmf->add_option("--rkhs-tol", pmf_opts.rkhs_tol, "relative eigenvalue cutoff");
  benchpmf->add_option("--threads", threads, "worker threads");
  benchpmf->add_option("--seed", seed, "master seed")->required();
  benchpmf->add_option("--out", out_path, "JSON report path")->required();
  add_fit_option_flags(benchpmf, pmf_opts.fit);

  // --- imodpoly ---
  auto* imod = app.add_subcommand("imodpoly", "iterative polynomial background estimate");
  imod->add_option("--in", in_path, "input spectra CSV")->required();
  imod->add_option("--degree", degree, "polynomial degree");
  imod->add_option("--max-iter", max_iter, "iteration cap");
  imod->add_option("--col", col, "column to process (-1 = all)");
  imod->add_option("--out", out_path, "background CSV path")->required();

  // --- plot ---
  auto* plot = app.add_subcommand("plot", "render a report or spectra file as SVG");
  plot->add_option("--in", in_path, "input JSON report or CSV")->required();
  plot->add_option("--out", out_path, "output SVG")->required();
  plot->add_option("--kind", plot_kind, "auto|mae|trace|spectrum");
  plot->add_option("--col", col, "column for spectrum plots (-1 = first few)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    reg_cfg.contamination = parse_contamination(contamination);
    reg_cfg.seed = seed;
    spectra_cfg.seed = seed;
    if (genreg->parsed()) return cmd_gen_regression(reg_cfg, out_path);
    if (fitreg->parsed()) {
      if (in_path.empty() && fitreg_seed->count() == 0) {
        std::cerr << "fit-regression: --seed is required when generating data\n";
        return 2;
      }
      return cmd_fit_regression(reg_cfg, in_path, methods_csv, delta, q, fit_opts, out_path,
                                plot_path);
    }
    if (benchreg->parsed())
      return cmd_bench_regression(reg_cfg, sizes_csv, reps, methods_csv, delta, q, fit_opts,
                                  threads, out_path, !no_records);
    if (genspectra->parsed()) return cmd_gen_spectra(spectra_cfg, out_path, truth_path);
    if (fitbg->parsed())
      return cmd_fit_background(in_path, k, objective, delta, q, pmf_opts, seed, truth_path,
                                out_path, bg_path);
    if (benchpmf->parsed())
      return cmd_bench_pmf(spectra_cfg, datasets, m_csv, objectives_csv, delta, q, pmf_opts, threads,
                           out_path);
    if (imod->parsed()) return cmd_imodpoly(in_path, degree, max_iter, col, out_path);
    if (plot->parsed()) return cmd_plot(in_path, out_path, plot_kind, col);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
