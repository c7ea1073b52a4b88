#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "decaylab/initial_data.hpp"
#include "decaylab/models/adv_diff.hpp"
#include "decaylab/models/flux.hpp"
#include "decaylab/spectral/field.hpp"

namespace decaylab {

struct MHDConfig {
  double mu = 1.0;  // fluid viscosity
  double nu = 1.0;  // magnetic diffusivity
  GridSpec grid{};
  TimePolicy time{};
  int m_max = 3;

  void validate() const {
    grid.validate();
    time.validate();
    if (grid.dim != 2) throw config_error("mhd: only dim 2 is supported");
    if (!(mu > 0.0) || !(nu > 0.0)) throw config_error("mhd: mu and nu must be positive");
    if (m_max < 1) throw config_error("mhd: m_max must be at least 1");
  }

  double dealias_fraction() const { return product_dealias_fraction(grid, 2); }
};

/// Pseudo-spectral evaluation of the MHD nonlinearity on a stacked state
/// (u1, u2, b1, b2):
///
///     f = P[(u.grad)u - (b.grad)b],   g = (u.grad)b - (b.grad)u,
///
/// with P the Leray projector (the pressure gradient drops out). Both outputs
/// are dealiased to the quadratic band and have zero mean.
class MhdNonlinearity {
 public:
  MhdNonlinearity(const GridSpec& g, double fraction) : grid_(g), fraction_(fraction) {
    if (g.dim != 2) throw config_error("mhd: only dim 2 is supported");
  }

  double fraction() const { return fraction_; }
  double last_max_speed() const { return max_speed_; }

  /// Solenoidality tolerance applied to inputs; see divergence_residual().
  double solenoidal_tolerance = 1e-8;

  void operator()(const SpectralField& state, SpectralField& out) {
    if (state.components() != 4 || !(state.grid() == grid_))
      throw shape_error("mhd: expected stacked (u, b) state with 4 components on the model grid");
    const std::size_t n = grid_.size();
    if (!out.same_shape(state)) out = SpectralField(grid_, 4);

    band_ = dealias(state, fraction_);
    // blocks: u1 u2 b1 b2, then d_j u_i (i, j), then d_j b_i
    blocks_.assign(12 * n, cplx(0.0));
    std::copy(band_.values().begin(), band_.values().end(), blocks_.begin());
    for_each_mode(grid_, [&](std::size_t flat, const Mode& m) {
      for (int f = 0; f < 2; ++f)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const std::size_t blk = 4 + 4 * f + 2 * i + j;
            blocks_[blk * n + flat] = cplx(0.0, m.kappa[j]) * band_(2 * f + i, flat);
          }
    });
    phys_.resize(12 * n);
    inverse_blocks(grid_, blocks_.data(), phys_.data(), 12, scratch_);

    auto P = [&](std::size_t blk, std::size_t i) { return phys_[blk * n + i]; };
    prod_.resize(4 * n);
    max_speed_ = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      const double u[2] = {P(0, x), P(1, x)};
      const double b[2] = {P(2, x), P(3, x)};
      max_speed_ = std::max({max_speed_, std::hypot(u[0], u[1]), std::hypot(b[0], b[1])});
      for (int i = 0; i < 2; ++i) {
        double ugu = 0, bgb = 0, ugb = 0, bgu = 0;
        for (int j = 0; j < 2; ++j) {
          const double du = P(4 + 2 * i + j, x);  // d_j u_i
          const double db = P(8 + 2 * i + j, x);  // d_j b_i
          ugu += u[j] * du;
          bgb += b[j] * db;
          ugb += u[j] * db;
          bgu += b[j] * du;
        }
        prod_[i * n + x] = ugu - bgb;
        prod_[(2 + i) * n + x] = ugb - bgu;
      }
    }
    forward_blocks(grid_, prod_.data(), out.values().data(), 4, scratch_);
    out = dealias(out, fraction_);

    for_each_mode(grid_, [&](std::size_t flat, const Mode& m) {
      const double k2 = m.kappa_sq();
      if (k2 == 0.0) {
        for (int c = 0; c < 4; ++c) out(c, flat) = 0.0;
        return;
      }
      const cplx dot = m.kappa[0] * out(0, flat) + m.kappa[1] * out(1, flat);
      out(0, flat) -= m.kappa[0] * dot / k2;
      out(1, flat) -= m.kappa[1] * dot / k2;
    });
  }

  /// Throws when u or b departs from solenoidality beyond the tolerance.
  void check_solenoidal(const SpectralField& state) const {
    const double r = std::max(divergence_residual(slice2(state, 0)), divergence_residual(slice2(state, 2)));
    if (r > solenoidal_tolerance)
      throw config_error("mhd: non-solenoidal input, divergence residual " + std::to_string(r));
  }

  static SpectralField slice2(const SpectralField& s, int c0) {
    SpectralField out(s.grid(), 2);
    std::copy_n(s.component(c0).begin(), s.points(), out.component(0).begin());
    std::copy_n(s.component(c0 + 1).begin(), s.points(), out.component(1).begin());
    return out;
  }

 private:
  GridSpec grid_;
  double fraction_;
  double max_speed_ = 0.0;
  SpectralField band_;
  std::vector<cplx> blocks_;
  std::vector<double> phys_, prod_;
  TransformScratch scratch_;
};

/// (f, g) for divergence-free u, b on a 2D grid.
inline std::pair<SpectralField, SpectralField> nonlinear_term_mhd(const SpectralField& u,
                                                                  const SpectralField& b) {
  if (u.components() != 2 || b.components() != 2 || u.grid().dim != 2)
    throw shape_error("nonlinear_term_mhd: 2D vector fields required");
  MhdNonlinearity nl(u.grid(), product_dealias_fraction(u.grid(), 2));
  const SpectralField state = stack({&u, &b});
  nl.check_solenoidal(state);
  SpectralField out;
  nl(state, out);
  return {MhdNonlinearity::slice2(out, 0), MhdNonlinearity::slice2(out, 2)};
}

}  // namespace decaylab
