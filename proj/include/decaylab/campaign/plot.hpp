#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "decaylab/analysis/fit.hpp"

// Minimal SVG log-log plots: data markers, the fitted power law over its
// window, and a dashed guide with the predicted slope through the fit's value
// at the window start.

namespace decaylab::plot {

struct Panel {
  std::string title;
  TimeSeries series;
  std::optional<DecayFit> fit;
  std::optional<double> predicted_exponent;
  std::string placeholder;  // nonempty: draw a warning box instead of data
};

namespace detail {
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}
}  // namespace detail

/// Draws one panel into a w x h box at (x0, y0).
inline void draw_panel(std::ostringstream& os, const Panel& p, double x0, double y0, double w, double h) {
  using detail::num;
  const double ml = 48, mr = 10, mt = 22, mb = 30;
  const double px0 = x0 + ml, px1 = x0 + w - mr, py0 = y0 + mt, py1 = y0 + h - mb;
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(w) << "\" height=\""
     << num(h) << "\" fill=\"white\" stroke=\"#ccc\"/>\n";
  os << "<text x=\"" << num(x0 + w / 2) << "\" y=\"" << num(y0 + 15)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << detail::escape(p.title) << "</text>\n";

  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < p.series.size(); ++i)
    if (p.series.t[i] > 0.0 && p.series.y[i] > 0.0 && std::isfinite(p.series.y[i]))
      pts.emplace_back(std::log10(p.series.t[i]), std::log10(p.series.y[i]));

  if (!p.placeholder.empty() || pts.size() < 2) {
    const std::string msg = p.placeholder.empty() ? "no plottable samples" : p.placeholder;
    os << "<rect x=\"" << num(px0) << "\" y=\"" << num(py0) << "\" width=\"" << num(px1 - px0)
       << "\" height=\"" << num(py1 - py0) << "\" fill=\"#fff4e5\" stroke=\"#e0a040\"/>\n";
    os << "<text x=\"" << num((px0 + px1) / 2) << "\" y=\"" << num((py0 + py1) / 2)
       << "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#a05000\">warning: " << detail::escape(msg)
       << "</text>\n";
    return;
  }

  double lx0 = pts.front().first, lx1 = lx0, ly0 = pts.front().second, ly1 = ly0;
  for (auto [x, y] : pts) {
    lx0 = std::min(lx0, x);
    lx1 = std::max(lx1, x);
    ly0 = std::min(ly0, y);
    ly1 = std::max(ly1, y);
  }
  if (lx1 - lx0 < 1e-12) lx1 = lx0 + 1;
  if (ly1 - ly0 < 1e-12) {
    ly0 -= 0.5;
    ly1 += 0.5;
  }
  auto X = [&](double lx) { return px0 + (lx - lx0) / (lx1 - lx0) * (px1 - px0); };
  auto Y = [&](double ly) { return py1 - (ly - ly0) / (ly1 - ly0) * (py1 - py0); };

  os << "<rect x=\"" << num(px0) << "\" y=\"" << num(py0) << "\" width=\"" << num(px1 - px0)
     << "\" height=\"" << num(py1 - py0) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(lx0)); d <= static_cast<int>(std::floor(lx1)); ++d)
    os << "<text x=\"" << num(X(d)) << "\" y=\"" << num(py1 + 13)
       << "\" text-anchor=\"middle\" font-size=\"9\">1e" << d << "</text>\n";
  for (int d = static_cast<int>(std::ceil(ly0)); d <= static_cast<int>(std::floor(ly1)); ++d)
    os << "<text x=\"" << num(px0 - 3) << "\" y=\"" << num(Y(d) + 3)
       << "\" text-anchor=\"end\" font-size=\"9\">1e" << d << "</text>\n";
  os << "<text x=\"" << num((px0 + px1) / 2) << "\" y=\"" << num(py1 + 25)
     << "\" text-anchor=\"middle\" font-size=\"9\">t</text>\n";

  for (auto [x, y] : pts)
    os << "<circle cx=\"" << num(X(x)) << "\" cy=\"" << num(Y(y)) << "\" r=\"1.8\" fill=\"#1f77b4\"/>\n";

  if (p.fit) {
    const double a = std::log10(p.fit->window.t0), b = std::log10(p.fit->window.t1);
    const double ya = std::log10((*p.fit)(p.fit->window.t0)), yb = std::log10((*p.fit)(p.fit->window.t1));
    os << "<line x1=\"" << num(X(a)) << "\" y1=\"" << num(Y(ya)) << "\" x2=\"" << num(X(b)) << "\" y2=\""
       << num(Y(yb)) << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
    if (p.predicted_exponent) {
      const double yg = ya + *p.predicted_exponent * (b - a);
      os << "<line x1=\"" << num(X(a)) << "\" y1=\"" << num(Y(ya)) << "\" x2=\"" << num(X(b))
         << "\" y2=\"" << num(Y(yg)) << "\" stroke=\"#2ca02c\" stroke-dasharray=\"4,3\"/>\n";
    }
    std::string label = "fit " + detail::fixed3(p.fit->exponent);
    if (p.predicted_exponent) label += "  predicted " + detail::fixed3(*p.predicted_exponent);
    os << "<text x=\"" << num(px1 - 4) << "\" y=\"" << num(py0 + 12)
       << "\" text-anchor=\"end\" font-size=\"10\">" << label << "</text>\n";
  }
}

inline std::string svg_document(double w, double h, const std::string& body) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(w) << "\" height=\""
     << detail::num(h) << "\" viewBox=\"0 0 " << detail::num(w) << " " << detail::num(h) << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << body << "</svg>\n";
  return os.str();
}

inline std::string render(const Panel& p, double w = 480, double h = 320) {
  std::ostringstream body;
  draw_panel(body, p, 0, 0, w, h);
  return svg_document(w, h, body.str());
}

/// Rows of panels, one row per run.
inline std::string render_grid(const std::vector<std::vector<Panel>>& rows, double cell_w = 300,
                               double cell_h = 210) {
  std::size_t cols = 1;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  const double w = cell_w * cols, h = cell_h * std::max<std::size_t>(1, rows.size());
  std::ostringstream body;
  if (rows.empty())
    body << "<text x=\"" << detail::num(w / 2) << "\" y=\"" << detail::num(h / 2)
         << "\" text-anchor=\"middle\" font-size=\"12\">empty campaign</text>\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      draw_panel(body, rows[i][j], j * cell_w, i * cell_h, cell_w, cell_h);
  return svg_document(w, h, body.str());
}

}  // namespace decaylab::plot
