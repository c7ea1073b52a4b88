#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "decaylab/initial_data.hpp"

using namespace decaylab;

namespace {
constexpr double pi = std::numbers::pi;

double mode_energy(const SpectralField& s, std::size_t flat) {
  double e = 0.0;
  for (int c = 0; c < s.components(); ++c) e += std::norm(s(c, flat));
  return e;
}
}  // namespace

TEST(DecayData, ModulusFollowsRecipe) {
  const GridSpec g{2, 64, 40.0};
  const DecaySpec d{0.5, 2.0, 1.5, true, 3};
  const auto u = make_decay_character_data(g, d, 1, false);
  for_each_mode(g, [&](std::size_t f, const Mode& m) {
    const double r = std::sqrt(m.xi_sq());
    const double want = (r > 0.0 && r <= 1.5) ? 4.0 * std::pow(r, 1.0) : 0.0;
    EXPECT_NEAR(mode_energy(u, f), want, 1e-12 * (1.0 + want));
  });
  EXPECT_LT(hermitian_defect(u), 1e-15);
}

TEST(DecayData, SeedDeterminesPhases) {
  const GridSpec g{2, 32, 30.0};
  const auto a = make_decay_character_data(g, {0.0, 1.0, 1.0, true, 17}, 1, false);
  const auto b = make_decay_character_data(g, {0.0, 1.0, 1.0, true, 17}, 1, false);
  const auto c = make_decay_character_data(g, {0.0, 1.0, 1.0, true, 18}, 1, false);
  bool differs = false;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    EXPECT_EQ(a.values()[i], b.values()[i]);
    differs = differs || a.values()[i] != c.values()[i];
  }
  EXPECT_TRUE(differs);
}

TEST(DecayData, ZeroPhasesAreRealAndPositive) {
  const GridSpec g{1, 64, 50.0};
  const auto u = make_decay_character_data(g, {0.0, 1.0, 1.0, false, 0}, 1, false);
  for (const cplx& z : u.values()) {
    EXPECT_EQ(z.imag(), 0.0);
    EXPECT_GE(z.real(), 0.0);
  }
}

TEST(DecayData, DivergenceFreeVectorKeepsModulus) {
  // Property over seeds: solenoidal, real, and sum_c |u_hat_c|^2 = A^2 |xi|^{2 r*}.
  const GridSpec g{2, 32, 25.0};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const DecaySpec d{1.0, 0.7, 1.2, true, seed};
    const auto u = make_decay_character_data(g, d, 2, true);
    EXPECT_LT(divergence_residual(u), 1e-13);
    EXPECT_LT(hermitian_defect(u), 1e-15);
    for_each_mode(g, [&](std::size_t f, const Mode& m) {
      const double r2 = m.xi_sq();
      const double want = (r2 > 0.0 && r2 <= 1.44 * (1 + 1e-12)) ? 0.49 * r2 : 0.0;
      EXPECT_NEAR(mode_energy(u, f), want, 1e-12);
    });
  }
}

TEST(DecayData, RejectsInvalidInput) {
  const GridSpec g{2, 32, 2 * pi};
  EXPECT_THROW(make_decay_character_data(g, {-1.0, 1.0, 1.0, true, 0}, 1, false), config_error);
  EXPECT_THROW(make_decay_character_data(g, {0.0, 0.0, 1.0, true, 0}, 1, false), config_error);
  EXPECT_THROW(make_decay_character_data(g, {0.0, 1.0, 50.0, true, 0}, 1, false), config_error);
  EXPECT_THROW(make_decay_character_data(g, {0.0, 1.0, 11.0, true, 0}, 1, false), config_error);  // past 2/3 band
  EXPECT_THROW(make_decay_character_data(g, {0.0, 1.0, 1.0, true, 0}, 1, true), config_error);
  EXPECT_THROW(make_decay_character_data(g, {0.0, 1.0, 1.0, true, 0}, 3, false), config_error);
  EXPECT_NO_THROW(make_decay_character_data(g, {-0.9, 1.0, 1.0, true, 0}, 1, false));
}

TEST(LerayProjection, IdempotentAndSolenoidal) {
  const GridSpec g{2, 16, 9.0};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  PhysicalField p(g, 2);
  for (double& v : p.values()) v = n(rng);
  const auto s = forward_transform(p);
  const auto once = leray_project(s), twice = leray_project(once);
  EXPECT_LT(divergence_residual(once), 1e-13);
  for (std::size_t i = 0; i < once.values().size(); ++i) EXPECT_NEAR(std::abs(once.values()[i] - twice.values()[i]), 0.0, 1e-12);
  // Orthogonal projector: <Pv, v - Pv> = 0.
  SpectralField rest = s;
  rest -= once;
  EXPECT_NEAR(inner_product(once, rest), 0.0, 1e-10);
  EXPECT_THROW(leray_project(forward_transform(PhysicalField(g, 1))), shape_error);
}

TEST(ShellMass, MatchesBallIntegral) {
  // Ball integral of A^2 |xi|^{2r} over |xi| <= rho in 2D: 2 pi A^2 rho^{2+2r} / (2+2r).
  const GridSpec g{2, 256, 2 * pi * 64};
  for (double r : {0.0, 0.5, 1.0}) {
    const auto u = make_decay_character_data(g, {r, 1.0, 1.0, true, 1}, 1, false);
    for (double rho : {0.3, 0.6}) {
      const double exact = 2 * pi * std::pow(rho, 2 + 2 * r) / (2 + 2 * r);
      EXPECT_NEAR(shell_mass(u, rho), exact, 0.02 * exact) << "r*=" << r << " rho=" << rho;
    }
  }
}

TEST(ShellMass, BatchedMatchesSingle) {
  const GridSpec g{2, 64, 60.0};
  const auto u = make_decay_character_data(g, {0.5, 1.0, 1.0, true, 2}, 1, false);
  const std::vector<double> radii{0.1, 0.25, 0.5, 0.9};
  const auto batch = shell_masses(u, radii);
  for (std::size_t j = 0; j < radii.size(); ++j) EXPECT_DOUBLE_EQ(batch[j], shell_mass(u, radii[j]));
}

TEST(DecayCharacter, RoundTripAtN256) {
  const GridSpec g{2, 256, 2 * pi * 64};
  for (double r : {0.0, 0.5, 1.0}) {
    const auto u = make_decay_character_data(g, {r, 1.0, 1.2, true, 9}, 1, false);
    const auto e = estimate_decay_character(u, 0.1, 0.6);
    ASSERT_EQ(e.verdict, CharacterEstimate::Verdict::finite);
    EXPECT_NEAR(e.r_star_hat, r, 0.05);
  }
}

TEST(DecayCharacter, NoneDetectedWhenBallIsEmpty) {
  // Energy only on a single high mode: nothing near the origin.
  const GridSpec g{1, 64, 2 * pi * 8};
  SpectralField u(g, 1);
  u(0, 20) = 1.0;
  u(0, g.mirror(20)) = 1.0;
  const auto e = estimate_decay_character(u, 0.25, 1.0);
  EXPECT_EQ(e.verdict, CharacterEstimate::Verdict::none_detected);
  EXPECT_TRUE(std::isnan(e.r_star_hat));
  EXPECT_STREQ(to_string(e.verdict), "none-detected");
}

TEST(DecayCharacter, RejectsBadWindows) {
  const GridSpec g{2, 64, 60.0};
  const auto u = make_decay_character_data(g, {0.0, 1.0, 1.0, true, 2}, 1, false);
  EXPECT_THROW(estimate_decay_character(u, 0.5, 0.4), config_error);
  EXPECT_THROW(estimate_decay_character(u, 0.0, 0.4), config_error);
  EXPECT_THROW(estimate_decay_character(u, 0.1, 0.2), config_error);   // too few shells
  EXPECT_THROW(estimate_decay_character(u, 0.1, 100.0), config_error);  // beyond Nyquist
}
