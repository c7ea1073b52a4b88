#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "decaylab/spectral/field.hpp"

namespace decaylab {

/// Smooth low-frequency forcing profile with a closed-form transform.
///
/// gaussian: scalar phi(x) = A exp(-|x|^2 / (2 s^2)) centred at the origin
///           (periodically wrapped).
/// vortex:   divergence-free vector phi = (-d2 psi, d1 psi) with psi the
///           gaussian above; requires dim 2.
struct ForcingProfile {
  enum class Kind { gaussian, vortex };
  Kind kind = Kind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;

  int components(int dim) const { return kind == Kind::gaussian ? 1 : dim; }

  /// Continuous transform of phi at wavevector xi, component c.
  cplx transform(const std::array<double, 2>& xi, int dim, int c) const {
    const double s2 = width * width;
    const double k2 = xi[0] * xi[0] + xi[1] * xi[1];
    const double g = amplitude * std::pow(2.0 * std::numbers::pi * s2, 0.5 * dim) *
                     std::exp(-0.5 * s2 * k2);
    if (kind == Kind::gaussian) return g;
    return c == 0 ? cplx(0.0, -xi[1] * g) : cplx(0.0, xi[0] * g);
  }
};

inline const char* to_string(ForcingProfile::Kind k) {
  return k == ForcingProfile::Kind::gaussian ? "gaussian" : "vortex";
}

struct ForcingSpec {
  double beta = 2.0;
  ForcingProfile profile{};
  double t_on = 1.0;
  bool self_similar = true;

  /// Checks beta, t_on, and that the profile transform at the grid's band edge
  /// is below 1e-12 of its peak scale (band-limited to the retained modes).
  void validate(const GridSpec& g) const {
    if (!(beta > 0.0)) throw config_error("forcing: beta must be positive");
    if (!(t_on > 0.0)) throw config_error("forcing: t_on must be positive");
    if (!(profile.width > 0.0)) throw config_error("forcing: profile width must be positive");
    if (profile.kind == ForcingProfile::Kind::vortex && g.dim != 2)
      throw config_error("forcing: vortex profile needs dim 2");
    const double edge = g.band_edge();
    if (0.5 * profile.width * profile.width * edge * edge < std::log(1e12))
      throw config_error("forcing: profile width " + std::to_string(profile.width) +
                         " too narrow to be band-limited on this grid");
  }
};

/// Forcing field at time t >= t_on.
///
/// Self-similar mode: f(x,t) = t^{-beta-n/4} phi(x/sqrt(t)), evaluated
/// spectrally as t^{-beta-n/4+n/2} phi_hat(sqrt(t) xi), which makes
/// ||D^m f(t)|| = t^{-beta-m/2} ||D^m phi|| for every m.
/// Fixed mode: f(x,t) = t^{-beta} phi(x).
inline SpectralField make_forcing(const ForcingSpec& spec, double t, const GridSpec& grid) {
  if (t < spec.t_on)
    throw config_error("make_forcing: t = " + std::to_string(t) + " precedes t_on = " +
                       std::to_string(spec.t_on));
  const int n = grid.dim;
  const int comps = spec.profile.components(n);
  SpectralField f(grid, comps);
  const double stretch = spec.self_similar ? std::sqrt(t) : 1.0;
  const double amp = spec.self_similar ? std::pow(t, -spec.beta - 0.25 * n + 0.5 * n)
                                       : std::pow(t, -spec.beta);
  if (spec.profile.amplitude == 0.0) return f;
  for_each_mode(grid, [&](std::size_t flat, const Mode& m) {
    if (grid.is_nyquist(grid.unflatten(flat)[0]) ||
        (n > 1 && grid.is_nyquist(grid.unflatten(flat)[1])))
      return;
    const std::array<double, 2> xi{stretch * m.xi[0], stretch * m.xi[1]};
    for (int c = 0; c < comps; ++c) f(c, flat) = amp * spec.profile.transform(xi, n, c);
  });
  return f;
}

}  // namespace decaylab
