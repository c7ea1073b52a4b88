#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "decaylab/initial_data.hpp"
#include "decaylab/spectral/field.hpp"

namespace decaylab {

/// Angularly integrated spectral density with ||u0||^2 = int_0^inf S(rho) drho.
///
/// The integral is evaluated as sum_i weight[i] * h(rho[i]) * density[i]. For
/// continuous densities on a log-spaced grid the weights are the trapezoid
/// rule in log(rho) (weight = rho * d log rho), which converges spectrally for
/// integrands that vanish at both ends. For radialized lattice data the
/// samples are shell centers j*dk with weight dk, so every shell's mass is
/// carried exactly.
struct RadialSpectrum {
  int dim = 2;
  std::vector<double> rho;
  std::vector<double> density;
  std::vector<double> weight;

  std::size_t size() const { return rho.size(); }

  void validate() const {
    if (rho.size() != density.size() || rho.size() != weight.size())
      throw shape_error("radial spectrum: array length mismatch");
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (density[i] < 0.0) throw config_error("radial spectrum: negative density");
      if (i > 0 && !(rho[i] > rho[i - 1]))
        throw config_error("radial spectrum: radii must be strictly increasing");
    }
  }

  double total() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < size(); ++i) acc += weight[i] * density[i];
    return acc;
  }
};

/// Sampled squared seminorm ||D^m e^{nu t Lap} u0||^2.
struct OracleCurve {
  std::vector<double> times;
  std::vector<double> values;
  int order = 0;
  double viscosity = 1.0;
};

/// Surface area of the unit sphere S^{n-1}.
inline double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Log-spaced radii from rho_min to rho_max (both included) with at least
/// points_per_decade samples per decade, plus log-trapezoid weights.
inline RadialSpectrum log_grid_spectrum(int dim, double rho_min, double rho_max,
                                        int points_per_decade = 512) {
  if (!(rho_min > 0.0 && rho_max > rho_min)) throw config_error("radial grid: bad range");
  if (points_per_decade < 1) throw config_error("radial grid: points_per_decade must be positive");
  const double decades = std::log10(rho_max / rho_min);
  const int intervals = std::max(1, static_cast<int>(std::ceil(decades * points_per_decade)));
  const double h = std::log(rho_max / rho_min) / intervals;
  RadialSpectrum s;
  s.dim = dim;
  s.rho.resize(intervals + 1);
  s.weight.resize(intervals + 1);
  s.density.assign(intervals + 1, 0.0);
  for (int i = 0; i <= intervals; ++i) {
    s.rho[i] = i == intervals ? rho_max : rho_min * std::exp(h * i);
    const double w = (i == 0 || i == intervals) ? 0.5 * h : h;
    s.weight[i] = w * s.rho[i];
  }
  return s;
}

/// Density of the given samples on a log grid; weights follow log_grid_spectrum.
template <class F>
RadialSpectrum tabulate_spectrum(int dim, double rho_min, double rho_max, F&& density,
                                 int points_per_decade = 512) {
  RadialSpectrum s = log_grid_spectrum(dim, rho_min, rho_max, points_per_decade);
  for (std::size_t i = 0; i < s.size(); ++i) s.density[i] = density(s.rho[i]);
  s.validate();
  return s;
}

/// Radial density of the continuous recipe A|xi|^r* chi(|xi| <= rho0):
/// S(rho) = (2 pi)^-n |S^{n-1}| rho^{n-1} A^2 rho^{2 r*}, matching the
/// normalization of radialize().
inline RadialSpectrum synthetic_spectrum(int dim, const DecaySpec& spec,
                                         int points_per_decade = 512, double rho_min = 1e-6) {
  spec.validate(dim);
  if (!(spec.cutoff_radius > rho_min)) throw config_error("synthetic spectrum: rho0 below rho_min");
  const double c = unit_sphere_area(dim) * std::pow(2.0 * std::numbers::pi, -dim) *
                   spec.amplitude * spec.amplitude;
  return tabulate_spectrum(
      dim, rho_min, spec.cutoff_radius,
      [&](double r) { return c * std::pow(r, dim - 1 + 2.0 * spec.r_star); }, points_per_decade);
}

/// Bins lattice energy w|u_hat|^2 into shells of width dk centred on j*dk.
inline RadialSpectrum radialize(const SpectralField& field) {
  const GridSpec& g = field.grid();
  const double dk = g.dk();
  std::map<long, double> shells;
  for_each_mode(g, [&](std::size_t flat, const Mode& m) {
    double e = 0.0;
    for (int c = 0; c < field.components(); ++c) e += std::norm(field(c, flat));
    const long j = std::lround(std::sqrt(m.xi_sq()) / dk);
    shells[j] += e;
  });
  RadialSpectrum s;
  s.dim = g.dim;
  const double w = g.parseval_weight();
  for (const auto& [j, e] : shells) {
    s.rho.push_back(j * dk);
    s.density.push_back(e * w / dk);
    s.weight.push_back(dk);
  }
  return s;
}

/// int_0^inf rho^{2m} exp(-2 nu t rho^2) S(rho) drho by the spectrum's quadrature.
inline double evolve_seminorm_sq(const RadialSpectrum& spec, int m, double nu, double t) {
  if (t < 0.0) throw config_error("evolve_seminorm_sq: negative time");
  if (!(nu > 0.0)) throw config_error("evolve_seminorm_sq: viscosity must be positive");
  if (m < 0) throw config_error("evolve_seminorm_sq: order must be nonnegative");
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (spec.density[i] == 0.0) continue;
    const double r = spec.rho[i];
    const double moment = m == 0 ? 1.0 : std::pow(r * r, m);
    acc += spec.weight[i] * spec.density[i] * moment * std::exp(-2.0 * nu * t * r * r);
  }
  return acc;
}

inline OracleCurve oracle_curve(const RadialSpectrum& spec, int m, double nu,
                                const std::vector<double>& times) {
  OracleCurve c;
  c.times = times;
  c.order = m;
  c.viscosity = nu;
  c.values.reserve(times.size());
  for (double t : times) c.values.push_back(evolve_seminorm_sq(spec, m, nu, t));
  return c;
}

/// Exponent of the squared seminorm for data of decay character r*:
/// -(n/2 + r* + m). Norm exponents are half of this.
inline double predicted_sq_exponent(double r_star, int n, int m) {
  if (!(r_star > -0.5 * n)) throw config_error("predicted_sq_exponent: r_star must exceed -n/2");
  return -(0.5 * n + r_star + m);
}

}  // namespace decaylab
