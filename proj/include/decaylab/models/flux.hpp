#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "decaylab/error.hpp"
#include "decaylab/spectral/grid.hpp"

namespace decaylab {

/// Per-axis polynomial flux b_l(u) = c_0 + c_1 u + ... + c_d u^d, d <= 4.
struct PolyFlux {
  static constexpr int max_degree = 4;
  std::array<std::vector<double>, 2> coeffs{};

  static PolyFlux burgers(int axis = 0) {
    PolyFlux f;
    f.coeffs[axis] = {0.0, 1.0};
    return f;
  }
  static PolyFlux constant(double b0, double b1 = 0.0) {
    PolyFlux f;
    f.coeffs[0] = {b0};
    f.coeffs[1] = {b1};
    return f;
  }

  /// Highest power with a nonzero coefficient on the axis, -1 if identically zero.
  int degree(int axis) const {
    const auto& c = coeffs[axis];
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
      if (c[i] != 0.0) return i;
    return -1;
  }
  int degree() const { return std::max(degree(0), degree(1)); }
  bool active(int axis) const { return degree(axis) >= 0; }

  void validate(int dim) const {
    for (int a = 0; a < 2; ++a)
      if (degree(a) > max_degree)
        throw config_error("flux: polynomial degree exceeds " + std::to_string(max_degree));
    if (dim == 1 && active(1)) throw config_error("flux: axis 1 coefficients given for a 1D grid");
  }

  double eval(int axis, double u) const {
    double acc = 0.0;
    const auto& c = coeffs[axis];
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = acc * u + c[i];
    return acc;
  }
};

/// Retained fraction for a pseudo-spectral product of `factors` band-limited
/// fields: the largest K with (factors + 1) K < N, so aliased modes of the
/// product land strictly outside |k| <= K. Capped by the grid's own fraction.
inline double product_dealias_fraction(const GridSpec& g, int factors) {
  if (factors <= 1) return g.dealias_fraction;
  const int n = g.points_per_axis;
  const int kmax = (n - 1) / (factors + 1);
  return std::min(g.dealias_fraction, 2.0 * kmax / n);
}

}  // namespace decaylab
