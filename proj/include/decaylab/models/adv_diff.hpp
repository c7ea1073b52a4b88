#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "decaylab/models/flux.hpp"
#include "decaylab/models/forcing.hpp"
#include "decaylab/spectral/field.hpp"

namespace decaylab {

/// Time-stepping policy shared by both models.
struct TimePolicy {
  double dt_max = 0.05;      // fixed step ceiling
  double cfl = 0.5;          // dt <= cfl * dx / max|speed|; <= 0 disables
  double t_end = 1.0;
  std::vector<double> sample_times;  // strictly increasing, within [0, t_end]

  void validate() const {
    if (!(dt_max > 0.0)) throw config_error("time policy: dt must be positive");
    if (!(t_end > 0.0)) throw config_error("time policy: t_end must be positive");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
      if (sample_times[i] < 0.0 || sample_times[i] > t_end * (1.0 + 1e-12))
        throw config_error("time policy: sample time outside [0, t_end]");
      if (i > 0 && !(sample_times[i] > sample_times[i - 1]))
        throw config_error("time policy: sample times must be strictly increasing");
    }
  }
};

struct AdvDiffConfig {
  double nu = 1.0;
  PolyFlux flux = PolyFlux::burgers();
  GridSpec grid{};
  TimePolicy time{};
  int m_max = 3;

  void validate() const {
    grid.validate();
    flux.validate(grid.dim);
    time.validate();
    if (!(nu > 0.0)) throw config_error("adv-diff: nu must be positive");
    if (m_max < 1) throw config_error("adv-diff: m_max must be at least 1");
  }

  /// Retained fraction for G(u): b(u) . grad u is a product of degree+1 factors.
  double dealias_fraction() const { return product_dealias_fraction(grid, flux.degree() + 1); }
};

/// Pseudo-spectral evaluation of G(u) = sum_l b_l(u) D_l u with reusable
/// buffers. Input is truncated to the product band first, so for band-limited
/// u the result is exact on the retained modes.
class AdvDiffNonlinearity {
 public:
  AdvDiffNonlinearity(const GridSpec& g, PolyFlux flux, double fraction)
      : grid_(g), flux_(std::move(flux)), fraction_(fraction) {
    flux_.validate(g.dim);
  }

  double fraction() const { return fraction_; }
  const PolyFlux& flux() const { return flux_; }
  /// max_x max_l |b_l(u(x))| from the most recent evaluation.
  double last_max_speed() const { return max_speed_; }

  void operator()(const SpectralField& u, SpectralField& out) {
    if (u.components() != 1) throw shape_error("adv-diff: scalar field expected");
    if (!(u.grid() == grid_)) throw shape_error("adv-diff: grid mismatch");
    const std::size_t n = grid_.size();
    if (!out.same_shape(u)) out = SpectralField(grid_, 1);

    // spectral blocks: u, then D_l u for each active axis
    band_ = dealias(u, fraction_);
    std::vector<int> axes;
    for (int a = 0; a < grid_.dim; ++a)
      if (flux_.active(a)) axes.push_back(a);
    max_speed_ = 0.0;
    if (axes.empty()) {
      std::fill(out.values().begin(), out.values().end(), cplx(0.0));
      return;
    }
    blocks_.assign((1 + axes.size()) * n, cplx(0.0));
    std::copy(band_.values().begin(), band_.values().end(), blocks_.begin());
    for (std::size_t j = 0; j < axes.size(); ++j) {
      const int a = axes[j];
      for_each_mode(grid_, [&](std::size_t flat, const Mode& m) {
        blocks_[(1 + j) * n + flat] = cplx(0.0, m.kappa[a]) * band_(0, flat);
      });
    }
    const std::size_t nblocks = 1 + axes.size();
    phys_.resize(nblocks * n);
    inverse_blocks(grid_, blocks_.data(), phys_.data(), nblocks, scratch_);

    product_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double uval = phys_[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < axes.size(); ++j) {
        const double b = flux_.eval(axes[j], uval);
        max_speed_ = std::max(max_speed_, std::abs(b));
        acc += b * phys_[(1 + j) * n + i];
      }
      product_[i] = acc;
    }
    forward_blocks(grid_, product_.data(), out.component(0).data(), 1, scratch_);
    out = dealias(out, fraction_);
  }

 private:
  GridSpec grid_;
  PolyFlux flux_;
  double fraction_;
  double max_speed_ = 0.0;
  SpectralField band_;
  std::vector<cplx> blocks_;
  std::vector<double> phys_, product_;
  TransformScratch scratch_;
};

/// G(u) = b(u) . grad u, dealiased to the product band of the flux degree.
inline SpectralField nonlinear_term_adv_diff(const SpectralField& u, const PolyFlux& flux) {
  flux.validate(u.grid().dim);
  AdvDiffNonlinearity g(u.grid(), flux, product_dealias_fraction(u.grid(), flux.degree() + 1));
  SpectralField out;
  g(u, out);
  return out;
}

}  // namespace decaylab
