#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "decaylab/analysis/ledger.hpp"
#include "decaylab/heat_oracle.hpp"

using namespace decaylab;

namespace {

TimeSeries power_law(double c, double p, double t0, double t1, int n) {
  TimeSeries s;
  s.name = "pl";
  s.t = log_spaced(t0, t1, n);
  for (double t : s.t) s.y.push_back(c * std::pow(t, p));
  return s;
}

DecayFit fit_with(double exponent, double prefactor) {
  DecayFit f;
  f.exponent = exponent;
  f.prefactor = prefactor;
  return f;
}

// Synthetic record whose norms follow C t^{-(alpha + m/2)} exactly.
RunRecord synthetic_record(double alpha, int m_max, double t_end = 100.0) {
  RunRecord r;
  r.model = "adv_diff";
  r.grid = {2, 64, 2 * std::numbers::pi * 100};
  r.m_max = m_max;
  for (double t : log_spaced(0.1, t_end, 41)) {
    RunSample s;
    s.t = t;
    for (int m = 0; m <= m_max; ++m) {
      s.du.push_back(2.0 * std::pow(t, -(alpha + 0.5 * m)));
      s.df.push_back(0.0);
    }
    for (int m = 0; m < m_max; ++m) s.g.push_back(0.1 / (1.0 + t));
    r.samples.push_back(s);
  }
  return r;
}

}  // namespace

TEST(Fit, PurePowerLawIsExact) {
  // Property over seeded random exponents, prefactors and ranges.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> p(-4.0, 1.0), lc(-5.0, 5.0), lt(-2.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double expo = p(rng), c = std::exp(lc(rng)), t0 = std::pow(10.0, lt(rng));
    const auto s = power_law(c, expo, t0, t0 * 1e3, 5 + trial);
    const auto f = fit_exponent(s, {t0, t0 * 1e3});
    EXPECT_NEAR(f.exponent, expo, 1e-10);
    EXPECT_NEAR(f.prefactor / c, 1.0, 1e-10);
    EXPECT_LT(f.residual, 1e-10);
    EXPECT_EQ(f.n_points, 5 + trial);
  }
}

TEST(Fit, MatchesClosedFormLeastSquares) {
  // Independent slope formula: cov(log t, log y) / var(log t).
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.1);
  TimeSeries s;
  s.t = log_spaced(1.0, 1e3, 30);
  for (double t : s.t) s.y.push_back(std::pow(t, -0.7) * std::exp(noise(rng)));
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    mx += std::log(s.t[i]);
    my += std::log(s.y[i]);
  }
  mx /= s.size();
  my /= s.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sxy += (std::log(s.t[i]) - mx) * (std::log(s.y[i]) - my);
    sxx += (std::log(s.t[i]) - mx) * (std::log(s.t[i]) - mx);
  }
  const auto f = fit_exponent(s, {1.0, 1e3});
  EXPECT_NEAR(f.exponent, sxy / sxx, 1e-12);
  EXPECT_NEAR(std::log(f.prefactor), my - sxy / sxx * mx, 1e-12);
}

TEST(Fit, WindowSelectsSamples) {
  auto s = power_law(1.0, -1.0, 1.0, 100.0, 21);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.t[i] > 10.0 * (1 + 1e-9)) s.y[i] = std::pow(s.t[i], -3.0) * 1e2;
  const auto f = fit_exponent(s, {1.0, 10.0});
  EXPECT_NEAR(f.exponent, -1.0, 1e-12);
  EXPECT_EQ(f.n_points, 11);
}

TEST(Fit, RejectsDegenerateInput) {
  const auto s = power_law(1.0, -1.0, 1.0, 100.0, 21);
  EXPECT_THROW(fit_exponent(s, {1.0, 1.5}), config_error);  // too few points
  auto bad = s;
  bad.y[3] = 0.0;
  EXPECT_THROW(fit_exponent(bad, {1.0, 100.0}), config_error);
  bad.y[3] = std::nan("");
  EXPECT_THROW(fit_exponent(bad, {1.0, 100.0}), config_error);
  EXPECT_THROW(fit_lower_envelope(s, {1.0, 100.0}, 0), config_error);
}

TEST(Fit, LowerEnvelopeIgnoresBumps) {
  // 20 samples per decade, 5 bins per decade: one undisturbed sample per bin.
  TimeSeries s;
  s.t = log_spaced(1.0, 1e3, 61);
  for (std::size_t i = 0; i < s.size(); ++i) s.y.push_back(3.0 * std::pow(s.t[i], -1.25) * (i % 4 == 0 ? 1.0 : 1.7));
  const auto lower = fit_lower_envelope(s, {1.0, 1e3}, 5);
  EXPECT_TRUE(lower.lower_envelope);
  EXPECT_NEAR(lower.exponent, -1.25, 1e-10);
  EXPECT_NEAR(lower.prefactor, 3.0, 1e-9);
  EXPECT_EQ(lower.n_points, 16);
  const auto plain = fit_exponent(s, {1.0, 1e3});
  EXPECT_GT(plain.prefactor, 3.0);
}

TEST(Fit, SqrtFitHalvesExponent) {
  const auto sq = fit_exponent(power_law(4.0, -2.0, 1.0, 100.0, 11), {1.0, 100.0});
  const auto f = sqrt_fit(sq);
  EXPECT_NEAR(f.exponent, -1.0, 1e-12);
  EXPECT_NEAR(f.prefactor, 2.0, 1e-12);
}

TEST(Fit, SmallLogPeriodicPerturbation) {
  TimeSeries s = power_law(1.0, -1.0, 1.0, 1e4, 20);
  for (std::size_t i = 0; i < s.size(); ++i) s.y[i] *= 1.0 + 0.01 * std::sin(std::log(s.t[i]));
  const double p = fit_exponent(s, {1.0, 1e4}).exponent;
  EXPECT_GE(p, -1.02);
  EXPECT_LE(p, -0.98);
}

TEST(Fit, ConstantSeriesHasZeroExponent) {
  const auto f = fit_exponent(power_law(3.0, 0.0, 1.0, 100.0, 12), {1.0, 100.0});
  EXPECT_NEAR(f.exponent, 0.0, 1e-12);
  EXPECT_NEAR(f.prefactor, 3.0, 1e-12);
}

TEST(Window, AutoWindowRules) {
  const auto s = power_law(1.0, -1.0, 0.1, 100.0, 31);
  const auto oracle = auto_window(s, std::nullopt, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(oracle.t0, 0.5);
  EXPECT_DOUBLE_EQ(oracle.t1, 100.0);

  const GridSpec big{2, 64, 2 * std::numbers::pi * 100};  // horizon 1000
  const auto w = auto_window(s, big, 1.0);
  EXPECT_NEAR(w.t0, 1.0, 1e-12);  // first decade skipped
  EXPECT_DOUBLE_EQ(w.t1, 100.0);
  EXPECT_DOUBLE_EQ(auto_window(s, big, 1.0, 5.0).t0, 5.0);

  const auto long_run = power_law(1.0, -1.0, 0.1, 1000.0, 41);
  EXPECT_NEAR(auto_window(long_run, GridSpec{2, 512, 200.0}, 1.0).t1, 0.1 * std::pow(200.0 / (2 * std::numbers::pi), 2),
              1e-9);
  EXPECT_NEAR(auto_window(long_run, GridSpec{2, 512, 200.0}, 1.0).t1, 101.3, 0.05);

  const GridSpec small{2, 64, 2 * std::numbers::pi * 10};  // horizon 10
  EXPECT_NEAR(auto_window(s, small, 1.0).t1, 10.0, 1e-12);

  const GridSpec tiny{2, 64, 2 * std::numbers::pi};  // horizon 0.1
  try {
    auto_window(s, tiny, 1.0);
    FAIL() << "expected collapse";
  } catch (const config_error& e) {
    EXPECT_NE(std::string(e.what()).find("enlarge the box length"), std::string::npos);
  }
  EXPECT_THROW(auto_window(s, big, 1.0, 500.0), config_error);
  EXPECT_THROW(auto_window(TimeSeries{}, big, 1.0), config_error);
}

TEST(KendallTau, TrendsAndNaNs) {
  EXPECT_DOUBLE_EQ(kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(kendall_tau({1, 2, 3, 4}, {1, 2, 3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau({1, 2, 3}, {1, std::nan(""), 0.5}), -1.0);
  EXPECT_DOUBLE_EQ(kendall_tau({1, 2}, {1, 1}), 0.0);
}

TEST(Checks, UpperPassFailAndPremises) {
  std::vector<DecayFit> fits{fit_with(-0.5, 1), fit_with(-1.0, 1), fit_with(-1.3, 1)};
  auto c = check_theorem_upper(fits, std::nullopt, 0.1);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[1].verdict, CheckVerdict::pass);
  EXPECT_DOUBLE_EQ(c[2].predicted_exponent, -1.5);
  EXPECT_EQ(c[2].verdict, CheckVerdict::fail);  // -1.3 > -1.5 + 0.1
  // Forced with beta below alpha + 1: premises unmet, regardless of fit.
  c = check_theorem_upper(fits, 1.2, 0.1);
  for (const auto& x : c) EXPECT_EQ(x.verdict, CheckVerdict::premises_unmet);
  c = check_theorem_upper(fits, 1.5, 0.1);
  EXPECT_EQ(c[0].verdict, CheckVerdict::pass);
  EXPECT_EQ(std::string(to_string(c[0].theorem_id)), "T1.1");
  EXPECT_THROW(check_theorem_upper({}, std::nullopt), config_error);
}

TEST(Checks, LowerModes) {
  std::vector<DecayFit> lower{fit_with(-0.52, 1), fit_with(-1.01, 1)};
  auto c = check_theorem_lower(lower, 0.5, 0.52, std::nullopt, LowerMode::eta_equals_alpha, 0.03);
  EXPECT_EQ(c[0].verdict, CheckVerdict::pass);
  EXPECT_EQ(c[1].verdict, CheckVerdict::pass);
  EXPECT_EQ(std::string(to_string(c[0].theorem_id)), "T1.2");
  // eta far above alpha cannot be the equal case.
  c = check_theorem_lower(lower, 0.3, 0.52, std::nullopt, LowerMode::eta_equals_alpha, 0.03);
  EXPECT_EQ(c[0].verdict, CheckVerdict::premises_unmet);
  // eta-greater prediction -(eta + m q / 2).
  c = check_theorem_lower(lower, 0.4, 0.52, std::nullopt, LowerMode::eta_greater, 0.03);
  EXPECT_EQ(std::string(to_string(c[0].theorem_id)), "T1.3");
  EXPECT_NEAR(c[1].predicted_exponent, -(0.52 + 0.5 * 1.3), 1e-12);
  EXPECT_EQ(c[1].verdict, CheckVerdict::pass);
  // forced: beta must exceed 2 eta - alpha + (q - 1) m_hat + 1 = 1.94
  c = check_theorem_lower(lower, 0.4, 0.52, 1.9, LowerMode::eta_greater, 0.03);
  EXPECT_EQ(c[0].verdict, CheckVerdict::premises_unmet);
  c = check_theorem_lower(lower, 0.4, 0.52, 2.0, LowerMode::eta_greater, 0.03);
  EXPECT_EQ(c[0].verdict, CheckVerdict::pass);
  // eta below alpha is inconsistent.
  c = check_theorem_lower(lower, 0.8, 0.52, std::nullopt, LowerMode::eta_equals_alpha, 0.03);
  EXPECT_EQ(c[0].verdict, CheckVerdict::premises_unmet);
  // a lower envelope decaying faster than predicted fails.
  std::vector<DecayFit> steep{fit_with(-0.8, 1)};
  c = check_theorem_lower(steep, 0.5, 0.5, std::nullopt, LowerMode::eta_equals_alpha, 0.1);
  EXPECT_EQ(c[0].verdict, CheckVerdict::fail);
}

TEST(Checks, ReverseEstimate) {
  auto r = check_reverse(fit_with(-1.0, 2.0), fit_with(-0.52, 1.0), std::nullopt, {}, 0.05, 4.0);
  EXPECT_DOUBLE_EQ(r.check.predicted_exponent, -0.5);
  EXPECT_EQ(r.check.verdict, CheckVerdict::pass);
  EXPECT_NEAR(r.reverse_d0, 2.0 * 2.0 / (2.0 * std::sqrt(0.5)), 1e-12);
  // two-sided in the unforced case
  EXPECT_EQ(check_reverse(fit_with(-1.0, 1), fit_with(-0.3, 1), std::nullopt, {}, 0.05).check.verdict,
            CheckVerdict::fail);
  // alpha1 = 0.4 is gated out
  r = check_reverse(fit_with(-0.4, 1), fit_with(0.1, 1), std::nullopt, {}, 0.05);
  EXPECT_EQ(r.check.verdict, CheckVerdict::premises_unmet);
  EXPECT_TRUE(std::isnan(r.reverse_d0));
  // borderline beta = alpha1 + 1/2: upper side only with epsilon slack
  r = check_reverse(fit_with(-1.0, 1), fit_with(-0.4, 1), 1.5, 0.1, 0.05);
  EXPECT_EQ(std::string(to_string(r.check.theorem_id)), "T1.4");
  EXPECT_EQ(r.check.verdict, CheckVerdict::pass);
  r = check_reverse(fit_with(-1.0, 1), fit_with(-0.9, 1), 1.5, 0.1, 0.05);
  EXPECT_EQ(r.check.verdict, CheckVerdict::pass);  // far below is fine one-sided
  r = check_reverse(fit_with(-1.0, 1), fit_with(-0.2, 1), 1.5, 0.1, 0.05);
  EXPECT_EQ(r.check.verdict, CheckVerdict::fail);
  // forced with beta below the edge
  r = check_reverse(fit_with(-1.0, 1), fit_with(-0.5, 1), 1.2, {}, 0.05);
  EXPECT_EQ(r.check.verdict, CheckVerdict::premises_unmet);
}

TEST(Monotonicity, DetectsIncreasesAfterStart) {
  TimeSeries s;
  s.t = {1, 2, 3, 6, 7, 8};
  s.y = {1.0, 2.0, 0.9, 0.8, 0.81, 0.7};
  const auto r = check_monotone_zm(s, 0, 0.5, 0.0, 0.0, 0.0, 2.5);
  EXPECT_EQ(r.samples_checked, 4);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_DOUBLE_EQ(r.violations[0].t, 7);
  EXPECT_NEAR(r.max_violation, 0.0125, 1e-12);
  EXPECT_DOUBLE_EQ(r.K, 0.0);
}

TEST(Monotonicity, ReportsAnyInjectedIncrease) {
  // Property: a single increase above 1e-9 relative, injected at a random
  // sample of a decreasing series, is always found at that sample.
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    TimeSeries s = power_law(1.0, -0.7, 1.0, 100.0, 30);
    const std::size_t at = 1 + rng() % (s.size() - 1);
    const double bump = std::pow(10.0, std::uniform_real_distribution<double>(-8.9, -2.0)(rng));
    s.y[at] = s.y[at - 1] * (1.0 + bump);
    for (std::size_t i = at + 1; i < s.size(); ++i) s.y[i] = std::min(s.y[i], s.y[at] * 0.99);
    const auto r = check_monotone_zm(s, 0, 0.7, 0.0, 0.0, 0.0, 0.0, 1e-10);
    ASSERT_EQ(r.violations.size(), 1u) << "trial " << trial;
    EXPECT_DOUBLE_EQ(r.violations[0].t, s.t[at]);
  }
}

TEST(Checks, NeverPassWithViolatedPremise) {
  // Property over random fits: whenever a stated premise is false the
  // verdict is not pass.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  auto premises_hold = [](const TheoremCheck& c) {
    for (const auto& p : c.side_conditions)
      if (!p.holds) return false;
    return true;
  };
  int violated = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const double alpha = u(rng), eta = u(rng), beta = u(rng);
    std::vector<DecayFit> fits, lower;
    for (int m = 0; m <= 2; ++m) {
      fits.push_back(fit_with(-(alpha + 0.5 * m) + 0.05 * (u(rng) - 1.5), 1.0));
      lower.push_back(fit_with(-(eta + 0.5 * m) + 0.05 * (u(rng) - 1.5), 1.0));
    }
    std::vector<TheoremCheck> all = check_theorem_upper(fits, beta, 0.1);
    for (auto mode : {LowerMode::eta_equals_alpha, LowerMode::eta_greater})
      for (auto& c : check_theorem_lower(lower, alpha, eta, beta, mode, 0.1)) all.push_back(c);
    all.push_back(check_reverse(fits[1], fits[0], beta, {}, 0.1).check);
    all.push_back(check_reverse(fits[1], fits[0], std::nullopt, {}, 0.1).check);
    for (const auto& c : all) {
      if (premises_hold(c)) continue;
      ++violated;
      EXPECT_NE(c.verdict, CheckVerdict::pass) << to_string(c.theorem_id) << " trial " << trial;
    }
  }
  EXPECT_GT(violated, 100);  // the sweep exercises the gate
}

TEST(Monotonicity, ForcingCorrectionRestoresMonotonicity) {
  // y = t^-1 - 0.5 t^-2 rises on (0, 1); the correction K t^{-(alpha+beta+m-1)}
  // with K = 2 C F / (alpha + beta + m - 1) and exponent -1 makes z decreasing.
  TimeSeries s;
  s.t = log_spaced(0.6, 0.95, 10);
  for (double t : s.t) s.y.push_back(-0.5 / t / t + 1.0 / t);
  const auto bare = check_monotone_zm(s, 0, 1.0, 0.0, 0.0, 0.0, 0.0);
  EXPECT_FALSE(bare.violations.empty());
  const auto fixed = check_monotone_zm(s, 0, 1.0, 1.0, 1.0, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(fixed.K, 2.0);
  EXPECT_TRUE(fixed.violations.empty());
  EXPECT_THROW(check_monotone_zm(s, 0, 0.0, 0.5, 1.0, 1.0, 0.0), config_error);
}

TEST(Ledger, SyntheticRecordPassesEveryCheck) {
  const auto rec = synthetic_record(0.5, 2);
  AnalysisPolicy p;
  const auto a = analyze_record(rec, p);
  ASSERT_TRUE(a.window);
  EXPECT_NEAR(a.window->t0, 1.0, 1e-12);
  ASSERT_EQ(a.fits.size(), 3u);
  for (int m = 0; m <= 2; ++m) EXPECT_NEAR(a.fits[m].exponent, -(0.5 + 0.5 * m), 1e-10);
  for (const auto& c : a.checks) EXPECT_EQ(c.verdict, CheckVerdict::pass) << to_string(c.theorem_id) << " m=" << c.m;
  EXPECT_FALSE(a.any_failure());
  ASSERT_TRUE(a.hypotheses.alpha());
  EXPECT_NEAR(*a.hypotheses.alpha(), 0.5, 1e-10);
  EXPECT_NEAR(*a.hypotheses.eta(), 0.5, 1e-10);
  EXPECT_FALSE(a.hypotheses.beta());
  ASSERT_EQ(a.hypotheses.h2.size(), 2u);
  EXPECT_DOUBLE_EQ(a.hypotheses.h2[0].kendall_tau, -1.0);
  for (const auto& r : a.monotonicity) EXPECT_TRUE(r.violations.empty());
  EXPECT_TRUE(a.reverse_d0.has_value());
}

TEST(Ledger, ForcedRecordEstimatesBeta) {
  auto rec = synthetic_record(0.5, 2);
  rec.forced = true;
  for (auto& s : rec.samples)
    for (int m = 0; m <= 2; ++m) s.df[m] = 3.0 * std::pow(s.t, -(2.0 + 0.5 * m));
  const auto h = hypothesis_ledger(rec);
  ASSERT_EQ(h.h3.size(), 3u);
  for (const auto& e : h.h3) {
    EXPECT_NEAR(e.beta, 2.0, 1e-10);
    EXPECT_NEAR(e.F, 3.0, 1e-9);
  }
  EXPECT_NEAR(*h.beta(), 2.0, 1e-10);
}

TEST(Ledger, FlaggedRatiosAreCounted) {
  auto rec = synthetic_record(0.5, 1);
  rec.samples[30].g[0] = std::nan("");
  const auto h = hypothesis_ledger(rec);
  EXPECT_EQ(h.h2[0].flagged, 1);
}

TEST(Ledger, ShortRecordIsNotEstimable) {
  auto rec = synthetic_record(0.5, 1, 0.5);
  const auto a = analyze_record(rec);
  EXPECT_TRUE(a.fits.empty());
  EXPECT_FALSE(a.notes.empty());
  EXPECT_TRUE(a.checks.empty());
}

TEST(Ledger, MhdNormCombinesFields) {
  RunRecord r;
  r.has_b = true;
  r.m_max = 0;
  RunSample s;
  s.t = 1.0;
  s.du = {3.0};
  s.db = {4.0};
  r.samples.push_back(s);
  EXPECT_DOUBLE_EQ(norm_series(r, 0).y[0], 5.0);
}

TEST(Ledger, OracleAnalysisFollowsHeatRates) {
  const auto spec = synthetic_spectrum(2, {1.0, 1.0, 1.0, false, 0});
  const auto times = log_spaced(1e2, 1e4, 41);
  std::vector<OracleCurve> curves;
  for (int m = 0; m <= 3; ++m) curves.push_back(oracle_curve(spec, m, 1.0, times));
  AnalysisPolicy p;
  p.tolerance = 0.03;
  const auto a = analyze_oracle(curves, p);
  ASSERT_EQ(a.fits.size(), 4u);
  for (int m = 0; m <= 3; ++m) EXPECT_NEAR(a.fits[m].exponent, -(1.0 + 0.5 * m), 1e-6);
  EXPECT_FALSE(a.any_failure());
}
