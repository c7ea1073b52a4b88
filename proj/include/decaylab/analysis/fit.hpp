#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "decaylab/error.hpp"
#include "decaylab/numeric.hpp"
#include "decaylab/spectral/grid.hpp"

namespace decaylab {

/// Sampled (t, value) pairs with strictly increasing t.
struct TimeSeries {
  std::string name;
  std::vector<double> t;
  std::vector<double> y;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
};

struct Window {
  double t0 = 0.0;
  double t1 = 0.0;
};

/// y ~ prefactor * t^exponent over the window.
struct DecayFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  Window window{};
  double residual = 0.0;  // RMS of log residuals
  int n_points = 0;
  bool lower_envelope = false;

  double operator()(double t) const { return prefactor * std::pow(t, exponent); }
};

inline constexpr int min_fit_points = 5;

namespace detail {
inline bool in_window(double t, const Window& w) {
  return t >= w.t0 * (1.0 - 1e-12) && t <= w.t1 * (1.0 + 1e-12);
}

inline DecayFit fit_points(const std::vector<double>& t, const std::vector<double>& y, const Window& w,
                           const std::string& name) {
  if (static_cast<int>(t.size()) < min_fit_points)
    throw config_error("fit " + name + ": window [" + std::to_string(w.t0) + ", " +
                       std::to_string(w.t1) + "] holds " + std::to_string(t.size()) +
                       " points, need at least " + std::to_string(min_fit_points));
  std::vector<double> lx(t.size()), ly(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) throw config_error("fit " + name + ": nonpositive time in window");
    if (!(y[i] > 0.0) || !std::isfinite(y[i]))
      throw config_error("fit " + name + ": nonpositive value " + std::to_string(y[i]) +
                         " at t = " + std::to_string(t[i]));
    lx[i] = std::log(t[i]);
    ly[i] = std::log(y[i]);
  }
  const LineFit f = fit_line(lx, ly);
  DecayFit out;
  out.exponent = f.slope;
  out.prefactor = std::exp(f.intercept);
  out.window = w;
  out.residual = f.rms_residual;
  out.n_points = static_cast<int>(t.size());
  return out;
}
}  // namespace detail

/// Least squares on (log t, log y) over samples inside the window.
inline DecayFit fit_exponent(const TimeSeries& s, const Window& w) {
  std::vector<double> t, y;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (detail::in_window(s.t[i], w)) {
      t.push_back(s.t[i]);
      y.push_back(s.y[i]);
    }
  return detail::fit_points(t, y, w, s.name);
}

/// Fit through the minimum of each log-time bin of width 1/bins_per_decade
/// decades, anchored at the window start.
inline DecayFit fit_lower_envelope(const TimeSeries& s, const Window& w, int bins_per_decade = 5) {
  if (bins_per_decade < 1) throw config_error("lower envelope: bins_per_decade must be positive");
  if (!(w.t0 > 0.0)) throw config_error("lower envelope: window must start at t > 0");
  std::map<long, std::size_t> best;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!detail::in_window(s.t[i], w)) continue;
    const long bin = static_cast<long>(
        std::floor(bins_per_decade * std::log10(s.t[i] / w.t0) * (1.0 + 1e-12)));
    auto it = best.find(bin);
    if (it == best.end() || s.y[i] < s.y[it->second]) best[bin] = i;
  }
  std::vector<double> t, y;
  for (const auto& [bin, i] : best) {
    t.push_back(s.t[i]);
    y.push_back(s.y[i]);
  }
  DecayFit f = detail::fit_points(t, y, w, s.name + " (lower envelope)");
  f.lower_envelope = true;
  return f;
}

/// Norm fit from a fit of the squared norm: halves the exponent and takes
/// the square root of the prefactor.
inline DecayFit sqrt_fit(const DecayFit& sq) {
  DecayFit f = sq;
  f.exponent = 0.5 * sq.exponent;
  f.prefactor = std::sqrt(sq.prefactor);
  f.residual = 0.5 * sq.residual;
  return f;
}

/// Fit window policy. The end is capped by the box horizon
/// c (L/2 pi)^2 / nu; the start skips the first decade of samples and any
/// configured transient t_star. Without a grid (oracle curves) the full
/// sampled range is used.
inline Window auto_window(const TimeSeries& s, const std::optional<GridSpec>& grid, double nu,
                          double t_star = 0.0, double horizon_c = 0.1) {
  if (s.empty()) throw config_error("auto_window: empty series " + s.name);
  double first = 0.0;
  for (double t : s.t)
    if (t > 0.0) {
      first = t;
      break;
    }
  if (!(first > 0.0)) throw config_error("auto_window: series " + s.name + " has no t > 0");
  if (!grid) return {std::max(first, t_star), s.t.back()};

  if (!(nu > 0.0)) throw config_error("auto_window: viscosity must be positive");
  const double l = grid->box_length / (2.0 * std::numbers::pi);
  const double horizon = horizon_c * l * l / nu;
  const double t0 = std::max(t_star, 10.0 * first);
  const double t1 = std::min(s.t.back(), horizon);
  if (t0 > s.t.back())
    throw config_error("auto_window: series " + s.name + " ends at t = " +
                       std::to_string(s.t.back()) + " before the window start " + std::to_string(t0));
  if (!(t1 > t0))
    throw config_error("auto_window: window collapsed, start " + std::to_string(t0) +
                       " is past the box horizon " + std::to_string(horizon) +
                       "; enlarge the box length L");
  return {t0, t1};
}

/// Kendall rank correlation of y against t, ignoring non-finite values.
/// Negative values indicate a decreasing trend.
inline double kendall_tau(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> p;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::isfinite(y[i])) p.emplace_back(t[i], y[i]);
  long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double s = (p[j].first - p[i].first) * (p[j].second - p[i].second);
      if (s > 0.0) ++concordant;
      if (s < 0.0) ++discordant;
    }
  const long total = concordant + discordant;
  return total > 0 ? static_cast<double>(concordant - discordant) / total : 0.0;
}

}  // namespace decaylab
