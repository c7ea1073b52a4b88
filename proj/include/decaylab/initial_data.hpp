#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "decaylab/numeric.hpp"
#include "decaylab/spectral/field.hpp"

namespace decaylab {

/// Spectral recipe u_hat(xi) = A |xi|^r* on |xi| <= rho0, with unit phases.
struct DecaySpec {
  double r_star = 0.0;
  double amplitude = 1.0;
  double cutoff_radius = 1.0;  // rho0, physical wavenumber units
  bool randomize_phases = true;
  std::uint64_t seed = 0;

  void validate(int dim) const {
    if (!(r_star > -0.5 * dim))
      throw config_error("decay spec: r_star must exceed -n/2 = " + std::to_string(-0.5 * dim));
    if (!(amplitude > 0.0)) throw config_error("decay spec: amplitude must be positive");
    if (!(cutoff_radius > 0.0)) throw config_error("decay spec: cutoff_radius must be positive");
  }
};

/// Least-squares estimate of the decay character from ball masses near zero.
struct CharacterEstimate {
  enum class Verdict { finite, none_detected };

  double r_star_hat = std::numeric_limits<double>::quiet_NaN();
  double shell_slope = std::numeric_limits<double>::quiet_NaN();
  double rho_min = 0.0;
  double rho_max = 0.0;
  double residual = 0.0;
  int shells = 0;
  Verdict verdict = Verdict::none_detected;
};

inline const char* to_string(CharacterEstimate::Verdict v) {
  return v == CharacterEstimate::Verdict::finite ? "finite" : "none-detected";
}

/// Modewise u_hat -> u_hat - kappa (kappa . u_hat) / |kappa|^2. The zero mode
/// (and any mode whose derivative symbol vanishes) is left untouched.
inline SpectralField leray_project(const SpectralField& v) {
  const GridSpec& g = v.grid();
  if (v.components() != g.dim)
    throw shape_error("leray_project: expected a vector field with " + std::to_string(g.dim) +
                      " components");
  SpectralField out = v;
  for_each_mode(g, [&](std::size_t flat, const Mode& m) {
    const double k2 = m.kappa_sq();
    if (k2 == 0.0) return;
    cplx dot = 0.0;
    for (int c = 0; c < g.dim; ++c) dot += m.kappa[c] * v(c, flat);
    for (int c = 0; c < g.dim; ++c) out(c, flat) -= m.kappa[c] * dot / k2;
  });
  return out;
}

/// Builds A |xi|^r* chi(|xi| <= rho0) with phases drawn on one lattice
/// half-space and mirrored, so the physical field is real. The mean mode is
/// zero. Vector output with divergence_free set is projected modewise and then
/// rescaled so that sum_c |u_hat_c(xi)|^2 = A^2 |xi|^{2 r*} still holds.
inline SpectralField make_decay_character_data(const GridSpec& grid, const DecaySpec& spec,
                                               int components, bool divergence_free) {
  grid.validate();
  spec.validate(grid.dim);
  if (spec.cutoff_radius > grid.nyquist_wavenumber())
    throw config_error("decay spec: cutoff_radius beyond grid Nyquist wavenumber " +
                       std::to_string(grid.nyquist_wavenumber()));
  if (spec.cutoff_radius > grid.band_edge() * (1.0 + 1e-12))
    throw config_error("decay spec: cutoff_radius beyond dealias band edge " +
                       std::to_string(grid.band_edge()));
  if (divergence_free && (components != grid.dim || grid.dim < 2))
    throw config_error("decay spec: divergence-free data needs a vector field with dim >= 2");
  if (components < 1 || components > 2) throw config_error("decay spec: 1 or 2 components");

  SpectralField s(grid, components);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double rho0 = spec.cutoff_radius * (1.0 + 1e-12);

  for_each_mode(grid, [&](std::size_t flat, const Mode& m) {
    const std::size_t mir = grid.mirror(flat);
    if (mir < flat) return;
    const double r2 = m.xi_sq();
    if (r2 == 0.0 || r2 > rho0 * rho0) return;
    const double target = spec.amplitude * std::pow(std::sqrt(r2), spec.r_star);

    std::vector<cplx> v(components);
    for (int c = 0; c < components; ++c)
      v[c] = spec.randomize_phases ? std::polar(1.0, phase(rng)) : cplx(1.0, 0.0);

    if (divergence_free) {
      const double k2 = m.kappa_sq();
      cplx dot = 0.0;
      for (int c = 0; c < components; ++c) dot += m.kappa[c] * v[c];
      for (int c = 0; c < components; ++c) v[c] -= m.kappa[c] * dot / k2;
      double n2 = 0.0;
      for (auto& z : v) n2 += std::norm(z);
      if (n2 < 1e-24) {
        const double k = std::sqrt(k2);
        v = {cplx(-m.kappa[1] / k), cplx(m.kappa[0] / k)};
      }
    }
    double n2 = 0.0;
    for (auto& z : v) n2 += std::norm(z);
    const double scale = target / std::sqrt(n2);

    for (int c = 0; c < components; ++c) {
      cplx z = v[c] * scale;
      if (mir == flat) z = cplx(std::abs(z) * (z.real() < 0.0 ? -1.0 : 1.0), 0.0);
      s(c, flat) = z;
      s(c, mir) = std::conj(z);
    }
  });
  return s;
}

/// Lattice quadrature of the ball integral of |u_hat|^2 over |xi| <= rho,
/// summed over components, with cell volume (2*pi/L)^n.
inline double shell_mass(const SpectralField& field, double rho) {
  const GridSpec& g = field.grid();
  const double r2max = rho * rho * (1.0 + 1e-12);
  double acc = 0.0;
  for_each_mode(g, [&](std::size_t flat, const Mode& m) {
    if (m.xi_sq() > r2max) return;
    for (int c = 0; c < field.components(); ++c) acc += std::norm(field(c, flat));
  });
  return acc * g.dk_volume();
}

/// Ball masses evaluated at every radius in one pass over the lattice.
inline std::vector<double> shell_masses(const SpectralField& field, const std::vector<double>& radii) {
  const GridSpec& g = field.grid();
  std::vector<double> out(radii.size(), 0.0);
  for_each_mode(g, [&](std::size_t flat, const Mode& m) {
    double e = 0.0;
    for (int c = 0; c < field.components(); ++c) e += std::norm(field(c, flat));
    if (e == 0.0) return;
    const double r2 = m.xi_sq();
    for (std::size_t j = 0; j < radii.size(); ++j)
      if (r2 <= radii[j] * radii[j] * (1.0 + 1e-12)) out[j] += e;
  });
  for (auto& v : out) v *= g.dk_volume();
  return out;
}

/// Fits log shell_mass against log rho on shells rho_min + j*dk inside the
/// window and reports r* = (slope - n)/2. A ball at rho_min holding less than
/// 1e-14 of the total mass is reported as none-detected.
inline CharacterEstimate estimate_decay_character(const SpectralField& field, double rho_min,
                                                  double rho_max) {
  const GridSpec& g = field.grid();
  if (!(rho_min > 0.0) || !(rho_max > rho_min))
    throw config_error("estimate_decay_character: empty window");
  if (rho_max > g.nyquist_wavenumber() * (1.0 + 1e-12))
    throw config_error("estimate_decay_character: window beyond resolved wavenumbers");
  std::vector<double> radii;
  for (int j = 0;; ++j) {
    const double r = rho_min + j * g.dk();
    if (r > rho_max * (1.0 + 1e-12)) break;
    radii.push_back(r);
  }
  if (radii.size() < 5)
    throw config_error("estimate_decay_character: window holds " + std::to_string(radii.size()) +
                       " shells, need at least 5");

  CharacterEstimate est;
  est.rho_min = rho_min;
  est.rho_max = radii.back();
  est.shells = static_cast<int>(radii.size());

  const double total = shell_mass(field, std::numeric_limits<double>::infinity());
  const auto mass = shell_masses(field, radii);
  if (total <= 0.0 || mass.front() < 1e-14 * total) return est;

  std::vector<double> lx(radii.size()), ly(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j) {
    lx[j] = std::log(radii[j]);
    ly[j] = std::log(mass[j]);
  }
  const LineFit fit = fit_line(lx, ly);
  est.shell_slope = fit.slope;
  est.residual = fit.rms_residual;
  est.r_star_hat = 0.5 * (est.shell_slope - g.dim);
  est.verdict = CharacterEstimate::Verdict::finite;
  return est;
}

}  // namespace decaylab
