#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "decaylab/error.hpp"

namespace decaylab {

/// Uniform periodic box [0, L)^dim sampled with N points per axis.
///
/// Storage is row-major with axis 0 slowest. Integer wavenumbers follow the
/// FFT ordering: index i maps to k = i for i < N/2 and k = i - N otherwise,
/// so the Nyquist index N/2 carries k = -N/2.
struct GridSpec {
  int dim = 2;
  int points_per_axis = 64;
  double box_length = 2.0 * std::numbers::pi;
  double dealias_fraction = 2.0 / 3.0;

  void validate() const {
    if (dim != 1 && dim != 2)
      throw config_error("grid: dim must be 1 or 2, got " + std::to_string(dim));
    if (points_per_axis < 8 || points_per_axis % 2 != 0)
      throw config_error("grid: points_per_axis must be even and >= 8, got " +
                         std::to_string(points_per_axis));
    if (!(box_length > 0.0)) throw config_error("grid: box_length must be positive");
    if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
      throw config_error("grid: dealias_fraction must lie in (0, 1]");
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points_per_axis);
    return s;
  }

  /// Lattice spacing in wavenumber space, 2*pi/L.
  double dk() const { return 2.0 * std::numbers::pi / box_length; }
  double dx() const { return box_length / points_per_axis; }

  int wavenumber_index(int i) const {
    return i < points_per_axis / 2 ? i : i - points_per_axis;
  }
  bool is_nyquist(int i) const { return i == points_per_axis / 2; }

  /// Largest physical wavenumber magnitude along one axis.
  double nyquist_wavenumber() const { return 0.5 * points_per_axis * dk(); }
  /// Edge of the retained band after dealiasing along one axis.
  double band_edge() const { return dealias_fraction * nyquist_wavenumber(); }

  /// Per-axis integer indices of a flat storage offset.
  std::array<int, 2> unflatten(std::size_t flat) const {
    if (dim == 1) return {static_cast<int>(flat), 0};
    const auto n = static_cast<std::size_t>(points_per_axis);
    return {static_cast<int>(flat / n), static_cast<int>(flat % n)};
  }

  std::size_t flatten(std::array<int, 2> idx) const {
    if (dim == 1) return static_cast<std::size_t>(idx[0]);
    return static_cast<std::size_t>(idx[0]) * points_per_axis + idx[1];
  }

  /// Flat offset of the mode -k.
  std::size_t mirror(std::size_t flat) const {
    auto idx = unflatten(flat);
    for (int a = 0; a < dim; ++a)
      idx[a] = (points_per_axis - idx[a]) % points_per_axis;
    return flatten(idx);
  }

  /// Cell volume of the wavenumber lattice, (2*pi/L)^dim.
  double dk_volume() const { return std::pow(dk(), dim); }

  /// Weight w with ||u||^2 = w * sum |u_hat|^2; see spectral/field.hpp.
  double parseval_weight() const { return std::pow(box_length, -dim); }

  bool operator==(const GridSpec&) const = default;
};

/// Physical wavevector of a mode plus the derivative symbol kappa, which
/// equals xi except on the Nyquist index of each axis where it is zero.
struct Mode {
  std::array<double, 2> xi{0.0, 0.0};
  std::array<double, 2> kappa{0.0, 0.0};
  std::array<int, 2> k{0, 0};

  double xi_sq() const { return xi[0] * xi[0] + xi[1] * xi[1]; }
  double kappa_sq() const { return kappa[0] * kappa[0] + kappa[1] * kappa[1]; }
};

inline Mode mode_at(const GridSpec& g, std::size_t flat) {
  Mode m;
  const auto idx = g.unflatten(flat);
  const double dk = g.dk();
  for (int a = 0; a < g.dim; ++a) {
    m.k[a] = g.wavenumber_index(idx[a]);
    m.xi[a] = m.k[a] * dk;
    m.kappa[a] = g.is_nyquist(idx[a]) ? 0.0 : m.xi[a];
  }
  return m;
}

/// Modes of every lattice point in storage order, built once per grid and
/// shared read-only across threads.
inline const std::vector<Mode>& mode_table(const GridSpec& g) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, std::vector<Mode>> cache;
  std::lock_guard lock(mu);
  auto [it, fresh] = cache.try_emplace({g.dim, g.points_per_axis, g.box_length});
  if (fresh) {
    it->second.reserve(g.size());
    for (std::size_t flat = 0; flat < g.size(); ++flat) it->second.push_back(mode_at(g, flat));
  }
  return it->second;
}

/// Visits every lattice mode as f(flat, mode) in storage order.
template <class F>
void for_each_mode(const GridSpec& g, F&& f) {
  const auto& modes = mode_table(g);
  const std::size_t n = modes.size();
  for (std::size_t flat = 0; flat < n; ++flat) f(flat, modes[flat]);
}

}  // namespace decaylab
