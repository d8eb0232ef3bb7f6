#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "emglab/errors.hpp"
#include "emglab/numeric_util.hpp"

namespace emglab {

/// One plot series; lines become a single polyline, scatters a circle per point.
struct PlotSeries {
  enum class Style { Line, Scatter };
  std::string label;
  Vec x, y;
  Style style = Style::Line;
};

struct PlotLayout {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  int width = 820, height = 560;
};

namespace detail {

inline std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % 8];
}

}  // namespace detail

/// Standalone SVG with axes, ticks, legend, and the given series; output
/// bytes are a pure function of the input.
inline void emit_plot_svg(const std::vector<PlotSeries>& series, const std::string& path,
                          const PlotLayout& layout = {}) {
  if (series.empty()) throw DomainError("emit_plot_svg: need at least one series");
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ContractError("emit_plot_svg: series length mismatch");
    if (s.x.empty()) throw DomainError("emit_plot_svg: empty series");
  }

  auto tx = [&](double v) { return layout.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return layout.log_y ? std::log10(v) : v; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double vx = tx(s.x[i]), vy = ty(s.y[i]);
      if (!std::isfinite(vx) || !std::isfinite(vy)) continue;
      xmin = std::min(xmin, vx);
      xmax = std::max(xmax, vx);
      ymin = std::min(ymin, vy);
      ymax = std::max(ymax, vy);
    }
  }
  if (xmin > xmax) throw DomainError("emit_plot_svg: no finite points");
  if (xmax - xmin <= 0) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin <= 0) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double padx = 0.04 * (xmax - xmin), pady = 0.06 * (ymax - ymin);
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;

  const double left = 72, right = layout.width - 24, top = 40, bottom = layout.height - 52;
  auto px = [&](double v) { return left + (tx(v) - xmin) / (xmax - xmin) * (right - left); };
  auto py = [&](double v) { return bottom - (ty(v) - ymin) / (ymax - ymin) * (bottom - top); };

  std::ofstream out(path);
  if (!out) throw IoError("emit_plot_svg: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << layout.width << "\" height=\""
      << layout.height << "\" viewBox=\"0 0 " << layout.width << " " << layout.height << "\">\n";
  out << "<rect width=\"" << layout.width << "\" height=\"" << layout.height
      << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 5; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 5.0;
    const double fy = ymin + (ymax - ymin) * t / 5.0;
    const double gx = left + (right - left) * t / 5.0;
    const double gy = bottom - (bottom - top) * t / 5.0;
    const double label_x = layout.log_x ? std::pow(10.0, fx) : fx;
    const double label_y = layout.log_y ? std::pow(10.0, fy) : fy;
    out << "<line x1=\"" << detail::fmt_coord(gx) << "\" y1=\"" << bottom << "\" x2=\""
        << detail::fmt_coord(gx) << "\" y2=\"" << bottom + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << detail::fmt_coord(gx) << "\" y=\"" << bottom + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << detail::fmt_tick(label_x) << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::fmt_coord(gy) << "\" x2=\"" << left
        << "\" y2=\"" << detail::fmt_coord(gy) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << detail::fmt_coord(gy + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << detail::fmt_tick(label_y) << "</text>\n";
  }

  if (!layout.title.empty())
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"24\" font-size=\"14\" "
        << "text-anchor=\"middle\">" << layout.title << "</text>\n";
  if (!layout.xlabel.empty())
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << layout.height - 14
        << "\" font-size=\"12\" text-anchor=\"middle\">" << layout.xlabel << "</text>\n";
  if (!layout.ylabel.empty())
    out << "<text x=\"16\" y=\"" << (top + bottom) / 2 << "\" font-size=\"12\" "
        << "text-anchor=\"middle\" transform=\"rotate(-90 16 " << (top + bottom) / 2 << ")\">"
        << layout.ylabel << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = detail::series_color(si);
    if (s.style == PlotSeries::Style::Line) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) out << ' ';
        out << detail::fmt_coord(px(s.x[i])) << ',' << detail::fmt_coord(py(s.y[i]));
      }
      out << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx=\"" << detail::fmt_coord(px(s.x[i])) << "\" cy=\""
            << detail::fmt_coord(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << color
            << "\" fill-opacity=\"0.6\"/>\n";
    }
  }

  const double lx = left + 12;
  double ly = top + 8;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = detail::series_color(si);
    out << "<line x1=\"" << lx << "\" y1=\"" << detail::fmt_coord(ly + 4) << "\" x2=\"" << lx + 22
        << "\" y2=\"" << detail::fmt_coord(ly + 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << lx + 28 << "\" y=\"" << detail::fmt_coord(ly + 8)
        << "\" font-size=\"11\">" << series[si].label << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
  if (!out) throw IoError("emit_plot_svg: write failed for " + path);
}

}  // namespace emglab
