#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "emglab/em.hpp"
#include "emglab/errors.hpp"
#include "emglab/regression.hpp"

namespace emglab {

inline constexpr const char* kReportSchema = "emg-lab/1";

/// Everything a fit leaves behind: parameters, per-iteration trace, error
/// statistics, and the seeds/config needed to reproduce it. Wall-clock
/// timing is reported on the console only, so identical reruns produce
/// byte-identical files.
struct FitReport {
  std::string kind;            // subcommand name
  nlohmann::json config;       // resolved configuration echo
  nlohmann::json results;
};

inline nlohmann::json trial_stats_to_json(const TrialStats& s) {
  return {{"mae_a", s.mae_a}, {"mean_a", s.mean_a}, {"std_a", s.std_a},
          {"mae_b", s.mae_b}, {"mean_b", s.mean_b}, {"std_b", s.std_b}};
}

inline nlohmann::json trial_table_to_json(const TrialTable& t, bool include_records = true) {
  nlohmann::json out;
  out["sizes"] = t.sizes;
  out["methods"] = t.methods;
  nlohmann::json stats = nlohmann::json::array();
  for (std::size_t si = 0; si < t.sizes.size(); ++si) {
    for (std::size_t mi = 0; mi < t.methods.size(); ++mi) {
      nlohmann::json cell = trial_stats_to_json(t.stats[si][mi]);
      cell["size"] = t.sizes[si];
      cell["method"] = t.methods[mi];
      stats.push_back(cell);
    }
  }
  out["stats"] = stats;
  nlohmann::json records = nlohmann::json::array();
  if (include_records) {
    for (const TrialRecord& r : t.records)
      records.push_back({{"size", r.size}, {"rep", r.rep}, {"method", r.method},
                         {"err_a", r.err_a}, {"err_b", r.err_b}});
  }
  out["records"] = records;
  return out;
}

inline nlohmann::json fit_result_to_json(const FitResult& f, bool include_theta = true) {
  nlohmann::json out;
  if (include_theta) out["theta"] = f.theta;
  out["mix"] = {{"mu", f.mix.emg.mu}, {"sigma", f.mix.emg.sigma},
                {"lambda", f.mix.emg.lambda}, {"epsilon", f.mix.epsilon}};
  out["trace"] = f.trace;
  out["trace_kind"] = f.trace_kind == TraceKind::LogLikelihood ? "loglik" : "objective";
  out["iterations"] = f.iterations;
  out["converged"] = f.converged;
  return out;
}

inline void write_report_json(const FitReport& report, const std::string& path) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["kind"] = report.kind;
  j["config"] = report.config;
  j["results"] = report.results;
  std::ofstream out(path);
  if (!out) throw IoError("write_report_json: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write_report_json: write failed for " + path);
}

inline nlohmann::json read_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_report_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace emglab
