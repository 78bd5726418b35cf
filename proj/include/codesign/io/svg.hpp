#pragma once

// Minimal in-process SVG charts: line plots (optionally log-x), scatter
// plots, and heatmaps. Good enough for result inspection without an external
// plotting dependency, and byte-deterministic like the CSVs.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "codesign/io/csv.hpp"

namespace codesign::io {

inline const std::vector<std::string>& chart_palette() {
  static const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors;
}

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  int width = 760;
  int height = 480;
  std::vector<std::string> comments;  // reproducibility header
};

namespace detail {

struct Frame {
  double x0, x1, y0, y1;          // data range
  double px0, px1, py0, py1;      // pixel box (py0 is top)
  bool log_x;

  double sx(double x) const {
    double t = log_x ? (std::log10(x) - std::log10(x0)) / (std::log10(x1) - std::log10(x0))
                     : (x - x0) / (x1 - x0);
    return px0 + t * (px1 - px0);
  }
  double sy(double y) const { return py1 - (y - y0) / (y1 - y0) * (py1 - py0); }
};

inline std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&')
      o += "&amp;";
    else if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else
      o.push_back(c);
  }
  return o;
}

inline std::string num(double v) { return format_double(v); }

// Round tick label to limit digit noise.
inline std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

inline void open_svg(std::ofstream& out, const ChartOptions& opt) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n";
  for (const auto& c : opt.comments) out << "<!-- " << esc(c) << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline void draw_axes(std::ofstream& out, const Frame& f, const ChartOptions& opt) {
  out << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<line x1=\"" << num(f.px0) << "\" y1=\"" << num(f.py1) << "\" x2=\"" << num(f.px1)
      << "\" y2=\"" << num(f.py1) << "\"/>\n";
  out << "<line x1=\"" << num(f.px0) << "\" y1=\"" << num(f.py0) << "\" x2=\"" << num(f.px0)
      << "\" y2=\"" << num(f.py1) << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const int ticks = 5;
  for (int k = 0; k <= ticks; ++k) {
    double t = static_cast<double>(k) / ticks;
    double xv = f.log_x ? std::pow(10.0, std::log10(f.x0) + t * (std::log10(f.x1) - std::log10(f.x0)))
                        : f.x0 + t * (f.x1 - f.x0);
    double yv = f.y0 + t * (f.y1 - f.y0);
    double px = f.sx(xv), py = f.sy(yv);
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(f.py1) << "\" x2=\"" << num(px)
        << "\" y2=\"" << num(f.py1 + 4) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << num(px) << "\" y=\"" << num(f.py1 + 16)
        << "\" text-anchor=\"middle\">" << esc(tick_label(xv)) << "</text>\n";
    out << "<line x1=\"" << num(f.px0 - 4) << "\" y1=\"" << num(py) << "\" x2=\"" << num(f.px0)
        << "\" y2=\"" << num(py) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << num(f.px0 - 7) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\">" << esc(tick_label(yv)) << "</text>\n";
  }
  out << "<text x=\"" << num((f.px0 + f.px1) / 2) << "\" y=\"" << num(f.py1 + 34)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << esc(opt.x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << num((f.py0 + f.py1) / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 14 "
      << num((f.py0 + f.py1) / 2) << ")\">" << esc(opt.y_label) << "</text>\n";
  out << "<text x=\"" << num((f.px0 + f.px1) / 2) << "\" y=\"20\" text-anchor=\"middle\""
      << " font-size=\"14\" font-weight=\"bold\">" << esc(opt.title) << "</text>\n";
  out << "</g>\n";
}

inline Frame fit_frame(const std::vector<Series>& series, const ChartOptions& opt) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (opt.log_x && s.x[i] <= 0) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x0 == x1) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y0 == y1) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  double pad = 0.04 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  Frame f{x0, x1, y0, y1, 64, opt.width - 20.0, 32, opt.height - 44.0, opt.log_x};
  return f;
}

}  // namespace detail

inline void write_line_chart(const std::string& path, const std::vector<Series>& series,
                             const ChartOptions& opt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  detail::Frame f = detail::fit_frame(series, opt);
  detail::open_svg(out, opt);
  detail::draw_axes(out, f, opt);
  const auto& palette = chart_palette();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    out << "<polyline fill=\"none\" stroke=\"" << palette[k % palette.size()]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (opt.log_x && s.x[i] <= 0) continue;
      out << detail::num(f.sx(s.x[i])) << ',' << detail::num(f.sy(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << detail::num(f.px1 - 6) << "\" y=\"" << detail::num(f.py0 + 16 + 14 * k)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
        << palette[k % palette.size()] << "\">" << detail::esc(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

inline void write_scatter(const std::string& path, const std::vector<Series>& groups,
                          const ChartOptions& opt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  detail::Frame f = detail::fit_frame(groups, opt);
  detail::open_svg(out, opt);
  detail::draw_axes(out, f, opt);
  const auto& palette = chart_palette();
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const auto& s = groups[k];
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (opt.log_x && s.x[i] <= 0) continue;
      out << "<circle cx=\"" << detail::num(f.sx(s.x[i])) << "\" cy=\""
          << detail::num(f.sy(s.y[i])) << "\" r=\"2.4\" fill=\"" << palette[k % palette.size()]
          << "\" fill-opacity=\"0.7\"/>\n";
    }
    out << "<text x=\"" << detail::num(f.px1 - 6) << "\" y=\"" << detail::num(f.py0 + 16 + 14 * k)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
        << palette[k % palette.size()] << "\">" << detail::esc(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

// Blue (low) to yellow (high); NaN cells drawn gray.
inline std::string heat_color(double t) {
  if (std::isnan(t)) return "#bbbbbb";
  t = std::clamp(t, 0.0, 1.0);
  int r = static_cast<int>(std::lround(68 + t * (253 - 68)));
  int g = static_cast<int>(std::lround(1 + t * (231 - 1)));
  int b = static_cast<int>(std::lround(84 + t * (37 - 84)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

inline void write_heatmap(const std::string& path, const std::vector<std::vector<double>>& grid,
                          double alpha_min, double alpha_max, double beta_min, double beta_max,
                          const ChartOptions& opt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const int n = static_cast<int>(grid.size());
  detail::Frame f{alpha_min, alpha_max, beta_min,         beta_max,
                  64,        opt.width - 20.0, 32, opt.height - 44.0, false};
  detail::open_svg(out, opt);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : grid)
    for (double v : row)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!std::isfinite(lo)) {
    lo = 0;
    hi = 1;
  }
  if (lo == hi) hi = lo + 1;
  double cw = (f.px1 - f.px0) / n, ch = (f.py1 - f.py0) / n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double v = grid[a][b];
      double t = std::isfinite(v) ? (v - lo) / (hi - lo) : std::nan("");
      // alpha indexes columns (x), beta rows (y)
      double px = f.px0 + a * cw;
      double py = f.py1 - (b + 1) * ch;
      out << "<rect x=\"" << detail::num(px) << "\" y=\"" << detail::num(py) << "\" width=\""
          << detail::num(cw + 0.5) << "\" height=\"" << detail::num(ch + 0.5) << "\" fill=\""
          << heat_color(t) << "\"/>\n";
    }
  detail::draw_axes(out, f, opt);
  out << "</svg>\n";
}

}  // namespace codesign::io
