#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "decaylab/initial_data.hpp"
#include "decaylab/models/run.hpp"

using namespace decaylab;

namespace {
constexpr double pi = std::numbers::pi;

SpectralField band_limited_random(const GridSpec& g, int comps, std::uint64_t seed, double fraction) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  PhysicalField p(g, comps);
  for (double& v : p.values()) v = n(rng);
  return dealias(forward_transform(p), fraction);
}

double max_abs_diff(const PhysicalField& a, const PhysicalField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}
}  // namespace

TEST(PolyFlux, EvalDegreeAndValidation) {
  PolyFlux f;
  f.coeffs[0] = {1.0, -2.0, 0.5};
  f.coeffs[1] = {0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(f.eval(0, 3.0), 1.0 - 6.0 + 4.5);
  EXPECT_EQ(f.degree(0), 2);
  EXPECT_EQ(f.degree(1), -1);
  EXPECT_FALSE(f.active(1));
  EXPECT_NO_THROW(f.validate(1));
  f.coeffs[1] = {0.0, 1.0};
  EXPECT_THROW(f.validate(1), config_error);
  f.coeffs[0] = {0, 0, 0, 0, 0, 1.0};
  EXPECT_THROW(f.validate(2), config_error);
  EXPECT_EQ(PolyFlux::burgers().degree(), 1);
}

TEST(DealiasFraction, ProductBandExcludesAliases) {
  const GridSpec g{2, 512, 200.0};
  EXPECT_DOUBLE_EQ(product_dealias_fraction(g, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(product_dealias_fraction(g, 2), 2.0 * 170 / 512);
  EXPECT_DOUBLE_EQ(product_dealias_fraction(g, 3), 2.0 * 127 / 512);
  // Property: (factors + 1) K < N for the retained K.
  for (int n = 8; n <= 96; n += 2)
    for (int p = 2; p <= 5; ++p) {
      const GridSpec h{1, n, 1.0};
      const int k = static_cast<int>(std::floor(product_dealias_fraction(h, p) * n / 2 + 1e-9));
      EXPECT_LT((p + 1) * k, n);
    }
}

TEST(AdvDiff, BurgersNonlinearityAnalytic) {
  // u = sin x + cos 2x on [0, 2pi): u u_x = (sin x + cos 2x)(cos x - 2 sin 2x).
  const GridSpec g{1, 32, 2 * pi};
  const auto u = forward_transform(PhysicalField::sample(g, 1, [](std::array<double, 2> x, int) {
    return std::sin(x[0]) + std::cos(2 * x[0]);
  }));
  const auto G = inverse_transform(nonlinear_term_adv_diff(u, PolyFlux::burgers()));
  const auto want = PhysicalField::sample(g, 1, [](std::array<double, 2> x, int) {
    return (std::sin(x[0]) + std::cos(2 * x[0])) * (std::cos(x[0]) - 2 * std::sin(2 * x[0]));
  });
  EXPECT_LT(max_abs_diff(G, want), 1e-12);
}

TEST(AdvDiff, CubicFluxTwoAxesAnalytic) {
  // b = (u^2, 1 + u): G = u^2 u_x + (1 + u) u_y with u = sin x cos y.
  const GridSpec g{2, 32, 2 * pi};
  PolyFlux f;
  f.coeffs[0] = {0.0, 0.0, 1.0};
  f.coeffs[1] = {1.0, 1.0};
  const auto u = forward_transform(PhysicalField::sample(g, 1, [](std::array<double, 2> x, int) {
    return std::sin(x[0]) * std::cos(x[1]);
  }));
  const auto G = inverse_transform(nonlinear_term_adv_diff(u, f));
  const auto want = PhysicalField::sample(g, 1, [](std::array<double, 2> x, int) {
    const double v = std::sin(x[0]) * std::cos(x[1]);
    return v * v * std::cos(x[0]) * std::cos(x[1]) - (1 + v) * std::sin(x[0]) * std::sin(x[1]);
  });
  EXPECT_LT(max_abs_diff(G, want), 1e-12);
}

TEST(AdvDiff, NonlinearityIsOrthogonalToState) {
  // Property: <u, b(u).grad u> = 0 for every polynomial flux.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    PolyFlux f;
    const int deg = 1 + trial % 3;
    for (int a = 0; a < 2; ++a) {
      f.coeffs[a].resize(deg + 1);
      for (double& v : f.coeffs[a]) v = c(rng);
    }
    const GridSpec g{2, 32, 10.0};
    const auto u = band_limited_random(g, 1, rng(), product_dealias_fraction(g, deg + 1));
    const auto G = nonlinear_term_adv_diff(u, f);
    const double scale = sobolev_seminorm(u, 0) * sobolev_seminorm(G, 0);
    EXPECT_LT(std::abs(inner_product(u, G)), 1e-12 * scale) << "trial " << trial;
  }
}

TEST(Mhd, NonlinearityIsSolenoidalAndConservesEnergy) {
  // Property: f and g are divergence-free and <u,f> + <b,g> = 0.
  const GridSpec g{2, 32, 12.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double frac = product_dealias_fraction(g, 2);
    const auto u = leray_project(band_limited_random(g, 2, seed, frac));
    const auto b = leray_project(band_limited_random(g, 2, seed + 100, frac));
    const auto [f, gg] = nonlinear_term_mhd(u, b);
    EXPECT_LT(divergence_residual(f), 1e-10);
    EXPECT_LT(divergence_residual(gg), 1e-10);
    const double scale = sobolev_seminorm(stack({&u, &b}), 0) * sobolev_seminorm(stack({&f, &gg}), 0);
    EXPECT_LT(std::abs(inner_product(u, f) + inner_product(b, gg)), 1e-12 * scale);
  }
}

TEST(Mhd, InductionTermAnalytic) {
  // u = (sin y, 0), b = (0, sin x): (u.grad) b - (b.grad) u = (-sin x cos y, sin y cos x).
  const GridSpec g{2, 32, 2 * pi};
  const auto u = forward_transform(PhysicalField::sample(g, 2, [](std::array<double, 2> x, int c) {
    return c == 0 ? std::sin(x[1]) : 0.0;
  }));
  const auto b = forward_transform(PhysicalField::sample(g, 2, [](std::array<double, 2> x, int c) {
    return c == 1 ? std::sin(x[0]) : 0.0;
  }));
  const auto [f, gg] = nonlinear_term_mhd(u, b);
  const auto want = PhysicalField::sample(g, 2, [](std::array<double, 2> x, int c) {
    return c == 0 ? -std::sin(x[0]) * std::cos(x[1]) : std::sin(x[1]) * std::cos(x[0]);
  });
  EXPECT_LT(max_abs_diff(inverse_transform(gg), want), 1e-12);
  // (u.grad)u = 0 and (b.grad)b = 0 for these shears.
  EXPECT_LT(sobolev_seminorm(f, 0), 1e-12);
}

TEST(Mhd, RejectsNonSolenoidalInput) {
  const GridSpec g{2, 32, 12.0};
  const auto u = band_limited_random(g, 2, 1, 0.5);
  const auto b = leray_project(band_limited_random(g, 2, 2, 0.5));
  EXPECT_THROW(nonlinear_term_mhd(u, b), config_error);
}

TEST(Integrator, LinearDecayIsExact) {
  const GridSpec g{1, 32, 2 * pi};
  const auto u0 = band_limited_random(g, 1, 5, 0.5);
  IntegratingFactorRk4 step(g, {0.3});
  SpectralField u = u0, a(g, 1), zero(g, 1);
  for (int i = 0; i < 10; ++i) step.step(u, 0.1 * i, 0.1, zero, [](const SpectralField& s, double, SpectralField& out) {
    out = SpectralField(s.grid(), 1);
  });
  for_each_mode(g, [&](std::size_t f, const Mode& m) {
    EXPECT_NEAR(std::abs(u(0, f) - u0(0, f) * std::exp(-0.3 * m.xi_sq())), 0.0, 1e-13);
  });
}

TEST(Integrator, FourthOrderOnForcedMode) {
  // dU/dt = -nu k^2 U + cos(t) U^0 on the k = 1 mode; exact solution by
  // variation of constants. Halving h divides the error by about 16.
  const GridSpec g{1, 8, 2 * pi};
  const double nu = 0.5, lam = nu;  // k = 1
  auto exact = [&](double t) {
    return std::exp(-lam * t) + (lam * std::cos(t) + std::sin(t) - lam * std::exp(-lam * t)) / (1 + lam * lam);
  };
  auto solve = [&](int steps) {
    IntegratingFactorRk4 st(g, {nu});
    SpectralField u(g, 1), a(g, 1);
    u(0, 1) = 1.0;
    auto rhs = [](const SpectralField& s, double t, SpectralField& out) {
      out = SpectralField(s.grid(), 1);
      out(0, 1) = std::cos(t);
    };
    const double h = 2.0 / steps;
    for (int i = 0; i < steps; ++i) {
      rhs(u, i * h, a);
      st.step(u, i * h, h, a, rhs);
    }
    return std::abs(u(0, 1).real() - exact(2.0));
  };
  const double e1 = solve(10), e2 = solve(20);
  EXPECT_GT(e1 / e2, 13.0);
  EXPECT_LT(e1 / e2, 19.0);
}

TEST(Forcing, SelfSimilarScalingHolds) {
  const GridSpec g{2, 256, 200.0};
  ForcingSpec spec;
  spec.beta = 2.0;
  spec.profile.width = 3.0;
  for (auto kind : {ForcingProfile::Kind::gaussian, ForcingProfile::Kind::vortex}) {
    spec.profile.kind = kind;
    spec.validate(g);
    for (int m = 0; m <= 2; ++m) {
      const double ref = sobolev_seminorm(make_forcing(spec, 4.0, g), m) * std::pow(4.0, 2.0 + 0.5 * m);
      for (double t : {16.0, 64.0}) {
        const double v = sobolev_seminorm(make_forcing(spec, t, g), m) * std::pow(t, 2.0 + 0.5 * m);
        // exact up to lattice quadrature of the narrowing transform
        EXPECT_NEAR(v / ref, 1.0, 1e-4) << to_string(kind) << " m=" << m << " t=" << t;
      }
    }
  }
}

TEST(Forcing, VortexIsSolenoidalAndValidationBites) {
  const GridSpec g{2, 128, 60.0};
  ForcingSpec spec;
  spec.profile = {ForcingProfile::Kind::vortex, 1.0, 2.0};
  EXPECT_LT(divergence_residual(make_forcing(spec, 2.0, g)), 1e-14);
  EXPECT_THROW(make_forcing(spec, 0.5, g), config_error);
  spec.profile.width = 0.2;
  EXPECT_THROW(spec.validate(g), config_error);
  spec.profile.width = 2.0;
  spec.beta = 0.0;
  EXPECT_THROW(spec.validate(g), config_error);
  spec.beta = 1.0;
  EXPECT_THROW(spec.validate(GridSpec{1, 128, 60.0}), config_error);
}

TEST(Forcing, FixedProfileDecaysLikePowerLaw) {
  const GridSpec g{1, 128, 60.0};
  ForcingSpec spec;
  spec.self_similar = false;
  spec.beta = 1.5;
  spec.profile.width = 2.0;
  const double a = sobolev_seminorm(make_forcing(spec, 2.0, g), 1);
  const double b = sobolev_seminorm(make_forcing(spec, 8.0, g), 1);
  EXPECT_NEAR(a / b, std::pow(4.0, 1.5), 1e-12);
}

TEST(Run, HorizonFormula) {
  EXPECT_NEAR(box_horizon(GridSpec{2, 64, 2 * pi * 10}, 1.0), 10.0, 1e-12);
  EXPECT_NEAR(box_horizon(GridSpec{2, 64, 2 * pi * 10}, 2.0, 0.2), 10.0, 1e-12);
}

namespace {
AdvDiffConfig small_burgers() {
  AdvDiffConfig cfg;
  cfg.grid = {2, 64, 40.0};
  cfg.nu = 1.0;
  cfg.time.dt_max = 0.05;
  cfg.time.t_end = 4.0;
  cfg.time.sample_times = {0.0, 0.5, 1.0, 2.0, 4.0};
  cfg.m_max = 2;
  return cfg;
}
}  // namespace

TEST(Run, AdvDiffSamplesAndDiagnostics) {
  const auto cfg = small_burgers();
  const auto u0 = make_decay_character_data(cfg.grid, {0.0, 3.0, 1.5, true, 2}, 1, false);
  const auto rec = run_adv_diff(cfg, u0);
  ASSERT_EQ(rec.status, RunRecord::Status::ok);
  ASSERT_EQ(rec.samples.size(), 5u);
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const auto& s = rec.samples[i];
    EXPECT_EQ(s.t, cfg.time.sample_times[i]);
    ASSERT_EQ(s.du.size(), 3u);
    ASSERT_EQ(s.g.size(), 2u);
    EXPECT_LT(s.orth0, 1e-12);
    EXPECT_LT(s.g[0], 1e-10);
    EXPECT_LT(s.energy_residual, 1e-6);
    if (i > 0) {
      for (int m = 0; m <= 2; ++m) EXPECT_LT(s.du[m], rec.samples[i - 1].du[m]);
    }
  }
  EXPECT_NEAR(rec.samples[0].du[0], sobolev_seminorm(dealias(u0, cfg.dealias_fraction()), 0), 1e-14);
  EXPECT_TRUE(rec.warnings.empty()) << rec.warnings.front();
}

TEST(Run, AdvDiffIsDeterministic) {
  const auto cfg = small_burgers();
  const auto u0 = make_decay_character_data(cfg.grid, {0.0, 3.0, 1.5, true, 2}, 1, false);
  const auto a = run_adv_diff(cfg, u0), b = run_adv_diff(cfg, u0);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  EXPECT_EQ(a.steps, b.steps);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].du, b.samples[i].du);
    EXPECT_EQ(a.samples[i].energy_residual, b.samples[i].energy_residual);
  }
}

TEST(Run, ZeroFluxReducesToHeatSemigroup) {
  auto cfg = small_burgers();
  cfg.flux = PolyFlux{};
  const auto u0 = make_decay_character_data(cfg.grid, {0.5, 1.0, 1.5, true, 3}, 1, false);
  const auto rec = run_adv_diff(cfg, u0);
  for (const auto& s : rec.samples) {
    double want = 0.0;
    for_each_mode(cfg.grid, [&](std::size_t f, const Mode& m) {
      want += std::norm(u0(0, f)) * m.kappa_sq() * std::exp(-2 * s.t * m.xi_sq());
    });
    want = std::sqrt(want * cfg.grid.parseval_weight());
    EXPECT_NEAR(s.du[1], want, 1e-12 * want);
  }
}

TEST(Run, InstabilityAbortsWithPartialRecord) {
  AdvDiffConfig cfg;
  cfg.grid = {1, 32, 2 * pi};
  cfg.nu = 1e-3;
  cfg.time.dt_max = 2.0;
  cfg.time.cfl = 0.0;
  cfg.time.t_end = 400.0;
  cfg.time.sample_times = {2.0, 400.0};
  const auto u0 = make_decay_character_data(cfg.grid, {0.0, 500.0, 5.0, false, 0}, 1, false);
  const auto rec = run_adv_diff(cfg, u0);
  EXPECT_EQ(rec.status, RunRecord::Status::aborted);
  EXPECT_NE(rec.failure_reason.find("non-finite"), std::string::npos);
  EXPECT_LE(rec.samples.size(), 1u);
}

TEST(Run, HorizonAndTruncationWarnings) {
  auto cfg = small_burgers();
  cfg.time.t_end = 100.0;
  cfg.time.sample_times = {100.0};
  cfg.time.dt_max = 0.5;
  const auto u0 = make_decay_character_data(cfg.grid, {0.0, 0.1, 1.5, true, 2}, 1, false);
  const auto rec = run_adv_diff(cfg, u0);
  ASSERT_FALSE(rec.warnings.empty());
  EXPECT_NE(rec.warnings.front().find("horizon"), std::string::npos);
}

TEST(Run, MhdEnergyBalanceAndOrthogonality) {
  MHDConfig cfg;
  cfg.grid = {2, 64, 40.0};
  cfg.mu = 1.0;
  cfg.nu = 0.5;
  cfg.time.dt_max = 0.02;
  cfg.time.t_end = 1.0;
  cfg.time.sample_times = {0.25, 0.5, 1.0};
  cfg.m_max = 2;
  const auto u0 = make_decay_character_data(cfg.grid, {0.0, 1.0, 1.5, true, 4}, 2, true);
  const auto b0 = make_decay_character_data(cfg.grid, {0.0, 1.0, 1.5, true, 5}, 2, true);
  const auto rec = run_mhd(cfg, u0, b0);
  ASSERT_EQ(rec.status, RunRecord::Status::ok);
  ASSERT_EQ(rec.samples.size(), 3u);
  for (const auto& s : rec.samples) {
    EXPECT_LT(s.energy_residual, 1e-8);
    EXPECT_LT(s.orth0, 1e-12);
    EXPECT_LT(s.div_residual, 1e-6);
    EXPECT_EQ(s.db.size(), 3u);
  }
}

TEST(Run, MhdRejectsBadInputs) {
  MHDConfig cfg;
  cfg.grid = {2, 32, 20.0};
  cfg.time.t_end = 0.1;
  const auto u0 = make_decay_character_data(cfg.grid, {0.0, 1.0, 1.0, true, 4}, 2, true);
  const auto scalar = make_decay_character_data(cfg.grid, {0.0, 1.0, 1.0, true, 4}, 1, false);
  const auto rough = make_decay_character_data(cfg.grid, {0.0, 1.0, 1.0, true, 6}, 2, false);
  EXPECT_THROW(run_mhd(cfg, u0, scalar), config_error);
  EXPECT_THROW(run_mhd(cfg, u0, rough), config_error);
  ForcingSpec f;
  f.profile.width = 4.0;
  EXPECT_THROW(run_mhd(cfg, u0, u0, f), config_error);  // gaussian profile is scalar
  cfg.grid.dim = 1;
  EXPECT_THROW(run_mhd(cfg, u0, u0), config_error);
}

TEST(Run, ForcedAdvDiffReportsForcingNorms) {
  auto cfg = small_burgers();
  cfg.grid = {2, 128, 80.0};
  cfg.time.sample_times = {1.0, 2.0, 4.0};
  ForcingSpec f;
  f.beta = 2.0;
  f.profile.width = 3.0;
  f.t_on = 1.0;
  const auto u0 = make_decay_character_data(cfg.grid, {0.0, 1.0, 1.0, true, 2}, 1, false);
  const auto rec = run_adv_diff(cfg, u0, f);
  ASSERT_EQ(rec.status, RunRecord::Status::ok);
  EXPECT_TRUE(rec.forced);
  for (const auto& s : rec.samples) EXPECT_GT(s.df[0], 0.0);
  EXPECT_NEAR(rec.samples[2].df[0] / rec.samples[0].df[0], std::pow(4.0, -2.0), 1e-8);

  // Forcing work enters the residual by the trapezoid rule, so away from the
  // switch-on the per-step residual shrinks like h^3.
  cfg.time.dt_max = 0.025;
  const auto fine = run_adv_diff(cfg, u0, f);
  EXPECT_GT(rec.samples[2].energy_residual / fine.samples[2].energy_residual, 6.0);
  EXPECT_LT(fine.samples[2].energy_residual, 1e-6);
}
