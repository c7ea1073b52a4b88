#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "decaylab/models/adv_diff.hpp"
#include "decaylab/models/forcing.hpp"
#include "decaylab/models/integrator.hpp"
#include "decaylab/models/mhd.hpp"

namespace decaylab {

/// Diagnostics recorded at one sample time.
struct RunSample {
  double t = 0.0;
  std::vector<double> du;  // ||D^m u||, m = 0..m_max
  std::vector<double> db;  // ||D^m b|| (MHD only)
  std::vector<double> g;   // h2 ratio g_m, m = 0..m_max-1; NaN when flagged
  std::vector<double> df;  // ||D^m f||, m = 0..m_max (zero when unforced)
  double orth0 = 0.0;            // |<U, G(U)>| / (||U|| ||G(U)||)
  double energy_residual = 0.0;  // max per-step energy-law residual since previous sample
  double div_residual = 0.0;     // max solenoidality residual of u, b (MHD only)
  double dt = 0.0;               // last step size
};

struct RunRecord {
  enum class Status { ok, aborted };

  std::string model;  // "adv_diff" or "mhd"
  GridSpec grid{};
  double nu = 1.0;  // scalar diffusivity, or magnetic diffusivity for MHD
  double mu = 0.0;  // fluid viscosity (MHD)
  int m_max = 3;
  bool has_b = false;
  bool forced = false;
  std::vector<RunSample> samples;
  std::vector<std::string> warnings;
  Status status = Status::ok;
  std::string failure_reason;
  long steps = 0;
  double wall_seconds = 0.0;

  /// Smallest diffusivity in the run; governs the box horizon.
  double min_diffusivity() const { return has_b ? std::min(mu, nu) : nu; }
};

inline const char* to_string(RunRecord::Status s) {
  return s == RunRecord::Status::ok ? "ok" : "aborted";
}

/// Horizon beyond which torus runs stop emulating R^n decay:
/// t_box = c (L / 2 pi)^2 / nu with c = 0.1.
inline double box_horizon(const GridSpec& g, double nu, double c = 0.1) {
  const double l = g.box_length / (2.0 * std::numbers::pi);
  return c * l * l / nu;
}

/// |sum over m-tuples <D^(m) U, D^(m) G>| / ||D^{m+1} U||^2, or nullopt when
/// the denominator vanishes.
inline std::optional<double> h2_ratio(const SpectralField& state, const SpectralField& g, int m) {
  const double den = sobolev_seminorm_sq(state, m + 1);
  if (!(den > 0.0)) return std::nullopt;
  return std::abs(weighted_inner_product(state, g, m)) / den;
}

inline std::optional<double> h2_ratio_adv_diff(const SpectralField& u, const PolyFlux& flux, int m) {
  return h2_ratio(u, nonlinear_term_adv_diff(u, flux), m);
}

inline std::optional<double> h2_ratio_mhd(const SpectralField& u, const SpectralField& b, int m) {
  auto [f, g] = nonlinear_term_mhd(u, b);
  return h2_ratio(stack({&u, &b}), stack({&f, &g}), m);
}

namespace detail {

/// Shared time loop. `System` provides
///   int components(); std::vector<double> diffusivity();
///   void nonlinear(const SpectralField&, SpectralField& G);  // G(U)
///   double max_speed();                                     // from last call
///   std::optional<SpectralField> forcing(double t);         // stacked like U
///   void sample_extra(const SpectralField& U, RunSample&);
template <class System>
RunRecord integrate(System& sys, SpectralField state, const TimePolicy& time, RunRecord rec) {
  const auto wall0 = std::chrono::steady_clock::now();
  const GridSpec& g = state.grid();
  IntegratingFactorRk4 stepper(g, sys.diffusivity());
  const double w = g.parseval_weight();
  const int m_max = rec.m_max;

  SpectralField G, work, forcing_buf;
  auto rhs = [&](const SpectralField& u, double t, SpectralField& out) {
    sys.nonlinear(u, out);
    out *= -1.0;
    if (auto f = sys.forcing(t)) out += *f;
  };
  auto energy = [&](const SpectralField& u) { return sobolev_seminorm_sq(u, 0); };
  auto work_rate = [&](const SpectralField& u, double t) {
    auto f = sys.forcing(t);
    return f ? 2.0 * inner_product(u, *f) : 0.0;
  };

  double max_residual = 0.0, last_dt = 0.0;
  auto take_sample = [&](double t) {
    RunSample s;
    s.t = t;
    sys.sample_norms(state, m_max, s);
    sys.nonlinear(state, G);
    for (int m = 0; m < m_max; ++m) {
      auto r = h2_ratio(state, G, m);
      s.g.push_back(r ? *r : std::numeric_limits<double>::quiet_NaN());
    }
    const double nu_ = std::sqrt(energy(state)), ng = std::sqrt(energy(G));
    s.orth0 = (nu_ > 0.0 && ng > 0.0) ? std::abs(inner_product(state, G)) / (nu_ * ng) : 0.0;
    auto f = sys.forcing(t);
    for (int m = 0; m <= m_max; ++m) s.df.push_back(f ? sobolev_seminorm(*f, m) : 0.0);
    s.energy_residual = max_residual;
    s.dt = last_dt;
    sys.sample_extra(state, s);
    rec.samples.push_back(std::move(s));
    max_residual = 0.0;
  };

  const auto& samples = time.sample_times;
  std::size_t next = 0;
  double t = 0.0;
  if (next < samples.size() && samples[next] <= 0.0) {
    take_sample(0.0);
    ++next;
  }

  SpectralField a;
  try {
    while (t < time.t_end * (1.0 - 1e-14)) {
      const double target = next < samples.size() ? samples[next] : time.t_end;
      rhs(state, t, a);
      double h = time.dt_max;
      const double speed = sys.max_speed();
      if (time.cfl > 0.0 && speed > 0.0) h = std::min(h, time.cfl * g.dx() / speed);
      // land exactly on the next target with equal substeps
      const double remaining = target - t;
      const double nsub = std::ceil(remaining / h * (1.0 - 1e-12));
      h = remaining / std::max(1.0, nsub);
      const bool lands = nsub <= 1.0;

      const double e0 = energy(state);
      const double w0 = work_rate(state, t);
      work = state;
      stepper.step(work, t, h, a, rhs);
      const double t1 = lands ? target : t + h;

      // energy law: exact viscous loss of U_n plus trapezoid correction for
      // the nonlinear change in dissipation and for forcing work
      double e_heat = 0.0, d_heat = 0.0, d1 = 0.0;
      const auto& nu_c = stepper.diffusivity();
      const auto& k2 = stepper.xi_sq();
      const std::size_t n = g.size();
      for (int c = 0; c < state.components(); ++c)
        for (std::size_t i = 0; i < n; ++i) {
          const double e = std::norm(state(c, i));
          const double m2 = stepper.full_multiplier(c, i) * stepper.full_multiplier(c, i);
          e_heat += e * m2;
          d_heat += 2.0 * nu_c[c] * k2[i] * e * m2;
          d1 += 2.0 * nu_c[c] * k2[i] * std::norm(work(c, i));
        }
      e_heat *= w;
      d_heat *= w;
      d1 *= w;
      const double e1 = energy(work);
      if (!std::isfinite(e1)) throw instability_error("non-finite energy at t = " + std::to_string(t1));
      const double w1 = work_rate(work, t1);
      const double res = e1 - e_heat + 0.5 * h * (d1 - d_heat) - 0.5 * h * (w0 + w1);
      if (e0 > 0.0) max_residual = std::max(max_residual, std::abs(res) / e0);

      state = std::move(work);
      t = t1;
      last_dt = h;
      ++rec.steps;
      if (lands && next < samples.size()) {
        take_sample(t);
        ++next;
      }
    }
  } catch (const instability_error& e) {
    rec.status = RunRecord::Status::aborted;
    rec.failure_reason = e.what();
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return rec;
}

inline void horizon_warning(RunRecord& rec, double t_end) {
  const double tb = box_horizon(rec.grid, rec.min_diffusivity());
  if (t_end > tb)
    rec.warnings.push_back("t_end " + std::to_string(t_end) + " exceeds box horizon " +
                           std::to_string(tb) + "; late-time slopes see the lowest lattice mode");
}

inline void truncation_warning(RunRecord& rec, const SpectralField& before, const SpectralField& after) {
  const double e0 = sobolev_seminorm_sq(before, 0);
  const double e1 = sobolev_seminorm_sq(after, 0);
  if (e0 > 0.0 && (e0 - e1) > 1e-12 * e0)
    rec.warnings.push_back("initial data truncated to the dealiased band; energy fraction lost " +
                           std::to_string((e0 - e1) / e0));
}

class AdvDiffSystem {
 public:
  AdvDiffSystem(const AdvDiffConfig& cfg, const std::optional<ForcingSpec>& forcing)
      : cfg_(cfg), nl_(cfg.grid, cfg.flux, cfg.dealias_fraction()), forcing_(forcing) {}

  std::vector<double> diffusivity() const { return {cfg_.nu}; }
  void nonlinear(const SpectralField& u, SpectralField& out) { nl_(u, out); }
  double max_speed() const { return nl_.last_max_speed(); }
  std::optional<SpectralField> forcing(double t) const {
    if (!forcing_ || t < forcing_->t_on) return std::nullopt;
    return dealias(make_forcing(*forcing_, t, cfg_.grid), nl_.fraction());
  }
  void sample_norms(const SpectralField& u, int m_max, RunSample& s) const {
    for (int m = 0; m <= m_max; ++m) s.du.push_back(sobolev_seminorm(u, m));
  }
  void sample_extra(const SpectralField&, RunSample&) const {}

 private:
  AdvDiffConfig cfg_;
  AdvDiffNonlinearity nl_;
  std::optional<ForcingSpec> forcing_;
};

class MhdSystem {
 public:
  MhdSystem(const MHDConfig& cfg, const std::optional<ForcingSpec>& forcing)
      : cfg_(cfg), nl_(cfg.grid, cfg.dealias_fraction()), forcing_(forcing) {}

  std::vector<double> diffusivity() const { return {cfg_.mu, cfg_.mu, cfg_.nu, cfg_.nu}; }
  void nonlinear(const SpectralField& u, SpectralField& out) { nl_(u, out); }
  double max_speed() const { return nl_.last_max_speed(); }
  /// Forcing acts on the velocity equation only.
  std::optional<SpectralField> forcing(double t) const {
    if (!forcing_ || t < forcing_->t_on) return std::nullopt;
    SpectralField f = leray_project(dealias(make_forcing(*forcing_, t, cfg_.grid), nl_.fraction()));
    SpectralField zero(cfg_.grid, 2);
    return stack({&f, &zero});
  }
  void sample_norms(const SpectralField& s, int m_max, RunSample& out) const {
    const SpectralField u = MhdNonlinearity::slice2(s, 0), b = MhdNonlinearity::slice2(s, 2);
    for (int m = 0; m <= m_max; ++m) {
      out.du.push_back(sobolev_seminorm(u, m));
      out.db.push_back(sobolev_seminorm(b, m));
    }
  }
  void sample_extra(const SpectralField& s, RunSample& out) const {
    out.div_residual = std::max(divergence_residual(MhdNonlinearity::slice2(s, 0)),
                                divergence_residual(MhdNonlinearity::slice2(s, 2)));
  }

 private:
  MHDConfig cfg_;
  MhdNonlinearity nl_;
  std::optional<ForcingSpec> forcing_;
};

}  // namespace detail

/// Integrates u_t + b(u).grad u = nu Lap u + f from the given scalar data.
/// Instability aborts return the partial record with status aborted.
inline RunRecord run_adv_diff(const AdvDiffConfig& cfg, const SpectralField& u0,
                              const std::optional<ForcingSpec>& forcing = std::nullopt) {
  cfg.validate();
  if (u0.components() != 1 || !(u0.grid() == cfg.grid))
    throw config_error("run_adv_diff: initial field must be scalar on the configured grid");
  if (forcing) {
    forcing->validate(cfg.grid);
    if (forcing->profile.components(cfg.grid.dim) != 1)
      throw config_error("run_adv_diff: forcing profile must be scalar");
  }
  RunRecord rec;
  rec.model = "adv_diff";
  rec.grid = cfg.grid;
  rec.nu = cfg.nu;
  rec.m_max = cfg.m_max;
  rec.forced = forcing.has_value();
  detail::horizon_warning(rec, cfg.time.t_end);
  SpectralField state = dealias(u0, cfg.dealias_fraction());
  detail::truncation_warning(rec, u0, state);
  detail::AdvDiffSystem sys(cfg, forcing);
  return detail::integrate(sys, std::move(state), cfg.time, std::move(rec));
}

/// Integrates the 2D incompressible MHD system from divergence-free (u0, b0).
inline RunRecord run_mhd(const MHDConfig& cfg, const SpectralField& u0, const SpectralField& b0,
                         const std::optional<ForcingSpec>& forcing = std::nullopt) {
  cfg.validate();
  if (u0.components() != 2 || b0.components() != 2 || !(u0.grid() == cfg.grid) ||
      !(b0.grid() == cfg.grid))
    throw config_error("run_mhd: initial u and b must be 2D vector fields on the configured grid");
  if (forcing) {
    forcing->validate(cfg.grid);
    if (forcing->profile.kind != ForcingProfile::Kind::vortex)
      throw config_error("run_mhd: forcing profile must be the divergence-free vortex");
  }
  RunRecord rec;
  rec.model = "mhd";
  rec.grid = cfg.grid;
  rec.nu = cfg.nu;
  rec.mu = cfg.mu;
  rec.m_max = cfg.m_max;
  rec.has_b = true;
  rec.forced = forcing.has_value();
  detail::horizon_warning(rec, cfg.time.t_end);
  const SpectralField raw = stack({&u0, &b0});
  SpectralField state = dealias(raw, cfg.dealias_fraction());
  detail::truncation_warning(rec, raw, state);
  detail::MhdSystem sys(cfg, forcing);
  MhdNonlinearity(cfg.grid, cfg.dealias_fraction()).check_solenoidal(state);
  return detail::integrate(sys, std::move(state), cfg.time, std::move(rec));
}

}  // namespace decaylab
