#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "decaylab/analysis/checks.hpp"
#include "decaylab/analysis/fit.hpp"
#include "decaylab/heat_oracle.hpp"
#include "decaylab/models/run.hpp"

namespace decaylab {

/// Knobs for turning a record into fits and checks. Transient cutoffs of the
/// theory collapse to two times: the fit-window start t_star and the
/// monotonicity start a_m.
struct AnalysisPolicy {
  double t_star = 0.0;
  double a_m = 5.0;
  double tolerance = 0.1;
  double monotone_tolerance = 1e-10;
  int bins_per_decade = 5;
  double horizon_c = 0.1;
  std::optional<Window> window;  // overrides auto_window when set
  std::optional<double> epsilon;  // borderline slack for the reverse check
};

/// ||D^m u|| along the record; for MHD the combined (u, b) norm.
inline TimeSeries norm_series(const RunRecord& rec, int m) {
  TimeSeries s;
  s.name = "D" + std::to_string(m) + (rec.has_b ? "(u,b)" : "u");
  for (const auto& smp : rec.samples) {
    double v = smp.du.at(m) * smp.du.at(m);
    if (rec.has_b) v += smp.db.at(m) * smp.db.at(m);
    s.t.push_back(smp.t);
    s.y.push_back(std::sqrt(v));
  }
  return s;
}

inline TimeSeries squared(TimeSeries s) {
  for (auto& v : s.y) v *= v;
  s.name += "^2";
  return s;
}

inline TimeSeries ratio_series(const RunRecord& rec, int m) {
  TimeSeries s;
  s.name = "g" + std::to_string(m);
  for (const auto& smp : rec.samples) {
    s.t.push_back(smp.t);
    s.y.push_back(smp.g.at(m));
  }
  return s;
}

inline TimeSeries forcing_series(const RunRecord& rec, int m) {
  TimeSeries s;
  s.name = "D" + std::to_string(m) + "f";
  for (const auto& smp : rec.samples) {
    s.t.push_back(smp.t);
    s.y.push_back(smp.df.at(m));
  }
  return s;
}

struct RatioTrend {
  int m = 0;
  int samples = 0;
  int flagged = 0;  // zero-denominator samples excluded from the trend
  double kendall_tau = 0.0;
  double max_value = 0.0;
  double last_value = std::numeric_limits<double>::quiet_NaN();
};

struct ForcingEstimate {
  int m = 0;
  double F = 0.0;
  double beta = std::numeric_limits<double>::infinity();
  std::optional<DecayFit> fit;
};

/// Empirical content of the four hypotheses for one record.
struct HypothesisReport {
  std::optional<DecayFit> h1;  // ||u|| <= C0 t^-alpha
  std::vector<RatioTrend> h2;
  bool forced = false;
  std::vector<ForcingEstimate> h3;  // F_m = 0, beta = inf when unforced
  std::optional<DecayFit> h4;       // lower envelope, D0 t^-eta
  std::vector<std::string> notes;

  std::optional<double> alpha() const {
    return h1 ? std::optional(-h1->exponent) : std::nullopt;
  }
  std::optional<double> eta() const { return h4 ? std::optional(-h4->exponent) : std::nullopt; }
  /// Smallest estimated forcing exponent across orders; nullopt when unforced.
  std::optional<double> beta() const {
    if (!forced) return std::nullopt;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& e : h3) b = std::min(b, e.beta);
    return std::isfinite(b) ? std::optional(b) : std::nullopt;
  }
};

namespace detail {
inline std::optional<DecayFit> try_fit(const TimeSeries& s, const Window& w, bool lower, int bins,
                                       std::vector<std::string>& notes) {
  try {
    return lower ? fit_lower_envelope(s, w, bins) : fit_exponent(s, w);
  } catch (const config_error& e) {
    notes.push_back(std::string("not estimable: ") + e.what());
    return std::nullopt;
  }
}
}  // namespace detail

inline Window analysis_window(const RunRecord& rec, const AnalysisPolicy& p) {
  if (p.window) return *p.window;
  return auto_window(norm_series(rec, 0), rec.grid, rec.min_diffusivity(), p.t_star, p.horizon_c);
}

inline HypothesisReport hypothesis_ledger(const RunRecord& rec, const AnalysisPolicy& p = {}) {
  HypothesisReport h;
  h.forced = rec.forced;
  if (rec.samples.empty()) {
    h.notes.push_back("record has no samples");
    return h;
  }
  std::optional<Window> w;
  try {
    w = analysis_window(rec, p);
  } catch (const config_error& e) {
    h.notes.push_back(std::string("not estimable: ") + e.what());
  }
  const TimeSeries u = norm_series(rec, 0);
  if (w) {
    h.h1 = detail::try_fit(u, *w, false, p.bins_per_decade, h.notes);
    h.h4 = detail::try_fit(u, *w, true, p.bins_per_decade, h.notes);
  }

  for (int m = 0; m < rec.m_max; ++m) {
    const TimeSeries g = ratio_series(rec, m);
    RatioTrend tr;
    tr.m = m;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (w && !detail::in_window(g.t[i], *w)) continue;
      ++tr.samples;
      if (!std::isfinite(g.y[i])) {
        ++tr.flagged;
        continue;
      }
      tr.max_value = std::max(tr.max_value, g.y[i]);
      tr.last_value = g.y[i];
    }
    std::vector<double> tt, yy;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!w || detail::in_window(g.t[i], *w)) {
        tt.push_back(g.t[i]);
        yy.push_back(g.y[i]);
      }
    tr.kendall_tau = kendall_tau(tt, yy);
    h.h2.push_back(tr);
  }

  for (int m = 0; m <= rec.m_max; ++m) {
    ForcingEstimate e;
    e.m = m;
    if (rec.forced) {
      TimeSeries f = forcing_series(rec, m);
      TimeSeries pos;
      pos.name = f.name;
      for (std::size_t i = 0; i < f.size(); ++i)
        if (f.y[i] > 0.0) {
          pos.t.push_back(f.t[i]);
          pos.y.push_back(f.y[i]);
        }
      if (!pos.empty()) {
        e.fit = detail::try_fit(pos, {pos.t.front(), pos.t.back()}, false, p.bins_per_decade, h.notes);
        if (e.fit) {
          e.beta = -e.fit->exponent - 0.5 * m;
          // F_m as the smallest constant bounding every sample
          for (std::size_t i = 0; i < pos.size(); ++i)
            e.F = std::max(e.F, pos.y[i] * std::pow(pos.t[i], e.beta + 0.5 * m));
        }
      }
    }
    h.h3.push_back(e);
  }
  return h;
}

/// Everything the analysis layer derives from one record.
struct RecordAnalysis {
  HypothesisReport hypotheses;
  std::optional<Window> window;
  std::vector<DecayFit> fits;        // ||D^m u||, m = 0..m_hat
  std::vector<DecayFit> lower_fits;  // lower envelopes of the same
  std::vector<TheoremCheck> checks;
  std::vector<MonotonicityReport> monotonicity;
  std::optional<double> reverse_d0;
  std::vector<std::string> notes;

  bool any_failure() const {
    for (const auto& c : checks)
      if (c.verdict == CheckVerdict::fail) return true;
    for (const auto& r : monotonicity)
      if (!r.violations.empty()) return true;
    return false;
  }
};

namespace detail {
/// Checks shared by records and oracle curves, given per-order norm fits.
inline void run_checks(RecordAnalysis& a, std::optional<double> beta, const AnalysisPolicy& p) {
  if (a.fits.empty()) return;
  for (auto& c : check_theorem_upper(a.fits, beta, p.tolerance)) a.checks.push_back(std::move(c));
  if (a.lower_fits.size() == a.fits.size()) {
    const double alpha = -a.fits[0].exponent, eta = -a.lower_fits[0].exponent;
    const LowerMode mode = eta > alpha + p.tolerance ? LowerMode::eta_greater : LowerMode::eta_equals_alpha;
    for (auto& c : check_theorem_lower(a.lower_fits, alpha, eta, beta, mode, p.tolerance))
      a.checks.push_back(std::move(c));
  }
  if (a.fits.size() >= 2) {
    const ReverseCheck r = check_reverse(a.fits[1], a.fits[0], beta, p.epsilon, p.tolerance);
    a.checks.push_back(r.check);
    if (std::isfinite(r.reverse_d0)) a.reverse_d0 = r.reverse_d0;
  }
}
}  // namespace detail

inline RecordAnalysis analyze_record(const RunRecord& rec, const AnalysisPolicy& p = {}) {
  RecordAnalysis a;
  a.hypotheses = hypothesis_ledger(rec, p);
  if (rec.status == RunRecord::Status::aborted)
    a.notes.push_back("run aborted: " + rec.failure_reason);
  if (rec.samples.empty()) return a;
  try {
    a.window = analysis_window(rec, p);
  } catch (const config_error& e) {
    a.notes.push_back(e.what());
    return a;
  }
  try {
    for (int m = 0; m <= rec.m_max; ++m) {
      const TimeSeries s = norm_series(rec, m);
      a.fits.push_back(fit_exponent(s, *a.window));
      a.lower_fits.push_back(fit_lower_envelope(s, *a.window, p.bins_per_decade));
    }
  } catch (const config_error& e) {
    a.notes.push_back(std::string("fits unavailable: ") + e.what());
    a.fits.clear();
    a.lower_fits.clear();
  }
  detail::run_checks(a, a.hypotheses.beta(), p);

  const double alpha = a.fits.empty() ? 0.0 : -a.fits[0].exponent;
  for (int m = 0; m <= rec.m_max; ++m) {
    double f_m = 0.0, c_m = 0.0;
    const double beta = a.hypotheses.beta().value_or(std::numeric_limits<double>::infinity());
    if (rec.forced && m < static_cast<int>(a.hypotheses.h3.size())) f_m = a.hypotheses.h3[m].F;
    if (m < static_cast<int>(a.fits.size())) c_m = a.fits[m].prefactor;
    try {
      a.monotonicity.push_back(check_monotone_zm(squared(norm_series(rec, m)), m, alpha, beta, c_m,
                                                 f_m, p.a_m, p.monotone_tolerance));
    } catch (const config_error& e) {
      a.notes.push_back(e.what());
    }
  }
  return a;
}

/// Oracle curves hold squared seminorms for m = 0..m_hat on shared times.
/// Norm fits halve the squared-norm fits; the window is the full range
/// unless the policy overrides it.
inline RecordAnalysis analyze_oracle(const std::vector<OracleCurve>& curves,
                                     const AnalysisPolicy& p = {}) {
  RecordAnalysis a;
  if (curves.empty()) return a;
  std::vector<TimeSeries> sq;
  for (const auto& c : curves) {
    TimeSeries s;
    s.name = "D" + std::to_string(c.order) + "u^2";
    s.t = c.times;
    s.y = c.values;
    sq.push_back(std::move(s));
  }
  a.window = p.window ? *p.window : auto_window(sq[0], std::nullopt, curves[0].viscosity, p.t_star);
  try {
    for (const auto& s : sq) {
      a.fits.push_back(sqrt_fit(fit_exponent(s, *a.window)));
      a.lower_fits.push_back(sqrt_fit(fit_lower_envelope(s, *a.window, p.bins_per_decade)));
    }
  } catch (const config_error& e) {
    a.notes.push_back(std::string("fits unavailable: ") + e.what());
    a.fits.clear();
    a.lower_fits.clear();
  }
  if (!a.fits.empty()) {
    a.hypotheses.h1 = a.fits[0];
    a.hypotheses.h4 = a.lower_fits[0];
  }
  for (std::size_t m = 0; m < curves.size(); ++m) {
    ForcingEstimate e;
    e.m = static_cast<int>(m);
    a.hypotheses.h3.push_back(e);
  }
  detail::run_checks(a, std::nullopt, p);
  for (std::size_t m = 0; m < sq.size(); ++m)
    a.monotonicity.push_back(check_monotone_zm(sq[m], curves[m].order, 0.0, 0.0, 0.0, 0.0, p.a_m,
                                               p.monotone_tolerance));
  return a;
}

}  // namespace decaylab
