#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace decaylab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y = intercept + slope * x, centered for stability.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += r * r;
  }
  f.rms_residual = std::sqrt(rss / n);
  return f;
}

/// count points from t0 to t1 equally spaced in log t. Values within 1e-12
/// relative of an integer power of ten are snapped to it.
inline std::vector<double> log_spaced(double t0, double t1, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {t0};
  const double a = std::log10(t0), b = std::log10(t1);
  for (int i = 0; i < count; ++i) {
    double v = std::pow(10.0, a + (b - a) * i / (count - 1));
    const double p = std::round(std::log10(v));
    if (std::abs(v - std::pow(10.0, p)) <= 1e-12 * v) v = std::pow(10.0, p);
    out.push_back(v);
  }
  out.front() = t0;
  out.back() = t1;
  return out;
}

}  // namespace decaylab
