#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "emglab/errors.hpp"
#include "emglab/spectra.hpp"

namespace emglab {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline bool parse_double(const std::string& tok, double& out) {
  const char* s = tok.c_str();
  char* end = nullptr;
  out = std::strtod(s, &end);
  if (end == s) return false;
  while (*end != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*end))) return false;
    ++end;
  }
  return true;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool blank(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace detail

/// Matrix CSV: first column is the channel grid, remaining columns are
/// spectrograms; empty cells mark unobserved entries. An optional header
/// row is detected by a non-numeric first row. Values are written with 17
/// significant digits so the decimal round trip is exact.
inline SpectroDataset read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_matrix_csv: cannot open " + path);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    rows.push_back(detail::split_csv_line(line));
    row_lines.push_back(lineno);
  }
  if (rows.empty()) throw ParseError("read_matrix_csv: empty file", 0);

  std::size_t start = 0;
  {
    bool header = false;
    for (const std::string& tok : rows[0]) {
      double v;
      if (!detail::blank(tok) && !detail::parse_double(tok, v)) header = true;
    }
    if (header) start = 1;
  }
  if (start >= rows.size()) throw ParseError("read_matrix_csv: no data rows", row_lines[0]);

  const std::size_t width = rows[start].size();
  if (width < 2) throw ParseError("read_matrix_csv: need a grid column and at least one data column",
                                  row_lines[start]);
  const std::size_t n = rows.size() - start;
  const std::size_t m = width - 1;

  SpectroDataset ds;
  ds.grid.resize(n);
  ds.s = Matrix(n, m);
  ds.mask.assign(n * m, 1);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[start + r];
    const std::size_t at = row_lines[start + r];
    if (row.size() != width) throw ParseError("read_matrix_csv: ragged row", at);
    double g;
    if (!detail::parse_double(row[0], g))
      throw ParseError("read_matrix_csv: bad grid value '" + row[0] + "'", at);
    ds.grid[r] = g;
    for (std::size_t c = 0; c < m; ++c) {
      const std::string& tok = row[c + 1];
      if (detail::blank(tok)) {
        ds.mask[r * m + c] = 0;
        ds.s(r, c) = 0.0;
      } else {
        double v;
        if (!detail::parse_double(tok, v))
          throw ParseError("read_matrix_csv: bad value '" + tok + "'", at);
        ds.s(r, c) = v;
      }
    }
  }
  return ds;
}

inline void write_matrix_csv(const std::string& path, const SpectroDataset& ds,
                             const std::vector<std::string>& column_names = {}) {
  std::ofstream out(path);
  if (!out) throw IoError("write_matrix_csv: cannot open " + path);
  const std::size_t n = ds.n(), m = ds.m();
  if (!column_names.empty()) {
    out << "grid";
    for (std::size_t c = 0; c < m; ++c)
      out << ',' << (c < column_names.size() ? column_names[c] : "col" + std::to_string(c));
    out << '\n';
  }
  for (std::size_t r = 0; r < n; ++r) {
    out << detail::format_double(ds.grid[r]);
    for (std::size_t c = 0; c < m; ++c) {
      out << ',';
      if (ds.observed(r, c)) out << detail::format_double(ds.s(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("write_matrix_csv: write failed for " + path);
}

/// Plain-matrix convenience wrappers (fully observed, grid = row index).
inline void write_matrix_csv(const std::string& path, const Matrix& m,
                             const std::vector<std::string>& column_names = {}) {
  SpectroDataset ds;
  ds.grid.resize(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) ds.grid[i] = static_cast<double>(i);
  ds.s = m;
  ds.mask.assign(m.rows() * m.cols(), 1);
  write_matrix_csv(path, ds, column_names);
}

}  // namespace emglab
