#pragma once

#include <cmath>
#include <vector>

#include "decaylab/spectral/field.hpp"

namespace decaylab {

/// Classical fourth-order Runge-Kutta in integrating-factor form for
///
///     dU/dt = -diag(nu_c |xi|^2) U + N(U, t).
///
/// The diffusion multipliers exp(-nu_c |xi|^2 tau) are applied exactly, and
/// only nonnegative tau occur, so no stage amplifies high modes.
class IntegratingFactorRk4 {
 public:
  IntegratingFactorRk4(const GridSpec& g, std::vector<double> diffusivity)
      : grid_(g), nu_(std::move(diffusivity)), xi_sq_(g.size()) {
    for_each_mode(g, [&](std::size_t flat, const Mode& m) { xi_sq_[flat] = m.xi_sq(); });
  }

  const std::vector<double>& diffusivity() const { return nu_; }
  const std::vector<double>& xi_sq() const { return xi_sq_; }

  /// exp(-nu_c |xi|^2 h) for the step size of the last prepare() call.
  double full_multiplier(int c, std::size_t flat) const { return full_[c * grid_.size() + flat]; }

  void prepare(double h) {
    if (h == h_) return;
    h_ = h;
    const std::size_t n = grid_.size();
    half_.resize(n * nu_.size());
    full_.resize(n * nu_.size());
    for (std::size_t c = 0; c < nu_.size(); ++c)
      for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(-0.5 * nu_[c] * xi_sq_[i] * h);
        half_[c * n + i] = e;
        full_[c * n + i] = e * e;
      }
  }

  /// Advances u from t to t + h. `a` must hold N(u, t); rhs(state, time, out)
  /// evaluates N at the remaining stages.
  template <class Rhs>
  void step(SpectralField& u, double t, double h, const SpectralField& a, Rhs&& rhs) {
    prepare(h);
    stage_ = u;
    stage_.axpy(0.5 * h, a);
    apply(stage_, half_);
    rhs(stage_, t + 0.5 * h, b_);

    SpectralField half_u = u;
    apply(half_u, half_);
    stage_ = half_u;
    stage_.axpy(0.5 * h, b_);
    rhs(stage_, t + 0.5 * h, c_);

    SpectralField full_u = u;
    apply(full_u, full_);
    stage_ = c_;
    apply(stage_, half_);
    stage_ *= h;
    stage_ += full_u;
    rhs(stage_, t + h, d_);

    // u+ = E u + h/6 (E a + 2 E_half (b + c) + d)
    SpectralField acc = a;
    apply(acc, full_);
    b_ += c_;
    apply(b_, half_);
    acc.axpy(2.0, b_);
    acc += d_;
    u = std::move(full_u);
    u.axpy(h / 6.0, acc);
  }

 private:
  void apply(SpectralField& f, const std::vector<double>& mult) const {
    auto& v = f.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mult[i];
  }

  GridSpec grid_;
  std::vector<double> nu_;
  std::vector<double> xi_sq_;
  std::vector<double> half_, full_;
  double h_ = -1.0;
  SpectralField stage_, b_, c_, d_;
};

}  // namespace decaylab
