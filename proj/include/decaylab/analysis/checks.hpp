#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "decaylab/analysis/fit.hpp"
#include "decaylab/error.hpp"

namespace decaylab {

enum class TheoremId { T1_1, T1_2, T1_3, T1_4, T1_5 };
enum class CheckVerdict { pass, fail, premises_unmet };

inline const char* to_string(TheoremId id) {
  switch (id) {
    case TheoremId::T1_1: return "T1.1";
    case TheoremId::T1_2: return "T1.2";
    case TheoremId::T1_3: return "T1.3";
    case TheoremId::T1_4: return "T1.4";
    case TheoremId::T1_5: return "T1.5";
  }
  return "?";
}

inline const char* to_string(CheckVerdict v) {
  switch (v) {
    case CheckVerdict::pass: return "pass";
    case CheckVerdict::fail: return "fail";
    case CheckVerdict::premises_unmet: return "premises-unmet";
  }
  return "?";
}

struct Premise {
  std::string statement;
  bool holds = true;
};

/// Comparison of one fitted norm exponent against a predicted exponent.
struct TheoremCheck {
  TheoremId theorem_id = TheoremId::T1_1;
  int m = 0;
  double predicted_exponent = 0.0;
  double fitted_exponent = 0.0;
  double tolerance = 0.1;
  std::vector<Premise> side_conditions;
  CheckVerdict verdict = CheckVerdict::fail;
  std::string note;

  bool premises_hold() const {
    for (const auto& p : side_conditions)
      if (!p.holds) return false;
    return true;
  }
};

enum class LowerMode { eta_equals_alpha, eta_greater };

inline const char* to_string(LowerMode m) {
  return m == LowerMode::eta_equals_alpha ? "eta-equals-alpha" : "eta-greater";
}

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Verdict from premises and the exponent comparison; a failed premise
/// always wins.
inline void settle(TheoremCheck& c, bool agrees) {
  c.verdict = !c.premises_hold() ? CheckVerdict::premises_unmet
              : agrees           ? CheckVerdict::pass
                                 : CheckVerdict::fail;
}
}  // namespace detail

/// Upper-bound check: fits[m] is the norm fit of ||D^m u||. alpha_hat is read
/// from fits[0]; each order predicts -(alpha_hat + m/2) and passes when the
/// fitted exponent is at most the prediction plus tolerance. beta is the
/// forcing exponent, or nullopt for unforced runs (premise vacuous).
inline std::vector<TheoremCheck> check_theorem_upper(const std::vector<DecayFit>& fits,
                                                     std::optional<double> beta,
                                                     double tolerance = 0.1) {
  if (fits.empty()) throw config_error("check_theorem_upper: missing fit for m = 0");
  const double alpha = -fits[0].exponent;
  std::vector<Premise> premises{{"alpha = " + detail::fmt(alpha) + " >= 0", alpha >= 0.0}};
  if (beta)
    premises.push_back({"beta = " + detail::fmt(*beta) + " >= alpha + 1 = " + detail::fmt(alpha + 1.0),
                        *beta >= alpha + 1.0});
  else
    premises.push_back({"unforced: forcing premise vacuous", true});

  std::vector<TheoremCheck> out;
  for (std::size_t m = 0; m < fits.size(); ++m) {
    TheoremCheck c;
    c.theorem_id = TheoremId::T1_1;
    c.m = static_cast<int>(m);
    c.predicted_exponent = -(alpha + 0.5 * m);
    c.fitted_exponent = fits[m].exponent;
    c.tolerance = tolerance;
    c.side_conditions = premises;
    detail::settle(c, c.fitted_exponent <= c.predicted_exponent + tolerance);
    out.push_back(std::move(c));
  }
  return out;
}

/// Lower-bound check on lower-envelope fits lower_fits[m] of ||D^m u||.
///
/// eta-equals-alpha predicts -(alpha + m/2); premise |eta - alpha| within
/// tolerance and beta > alpha + 1 when forced.
/// eta-greater predicts -(eta + m q/2) with q = eta/alpha; premise eta > alpha
/// and beta > 2 eta - alpha + (q - 1) m_hat + 1 when forced.
/// A check passes when the fitted exponent is at least the prediction minus
/// tolerance. eta below alpha by more than the tolerance is inconsistent and
/// leaves every order premises-unmet.
inline std::vector<TheoremCheck> check_theorem_lower(const std::vector<DecayFit>& lower_fits,
                                                     double alpha_fit, double eta_fit,
                                                     std::optional<double> beta, LowerMode mode,
                                                     double tolerance = 0.1) {
  if (lower_fits.empty()) throw config_error("check_theorem_lower: missing lower-envelope fits");
  const double alpha = alpha_fit, eta = eta_fit;
  const int m_hat = static_cast<int>(lower_fits.size()) - 1;
  std::vector<Premise> premises;
  premises.push_back({"alpha = " + detail::fmt(alpha) + " > 0", alpha > 0.0});
  premises.push_back({"eta = " + detail::fmt(eta) + " >= alpha within tolerance",
                      eta >= alpha - tolerance});
  const double q = alpha > 0.0 ? eta / alpha : std::numeric_limits<double>::quiet_NaN();
  if (mode == LowerMode::eta_equals_alpha) {
    premises.push_back({"|eta - alpha| = " + detail::fmt(std::abs(eta - alpha)) + " <= " +
                            detail::fmt(tolerance),
                        std::abs(eta - alpha) <= tolerance});
    if (beta)
      premises.push_back({"beta = " + detail::fmt(*beta) + " > alpha + 1", *beta > alpha + 1.0});
  } else {
    premises.push_back({"eta > alpha", eta > alpha});
    if (beta) {
      const double bound = 2.0 * eta - alpha + (q - 1.0) * m_hat + 1.0;
      premises.push_back({"beta = " + detail::fmt(*beta) + " > 2 eta - alpha + (q - 1) m_hat + 1 = " +
                              detail::fmt(bound),
                          *beta > bound});
    }
  }
  if (!beta) premises.push_back({"unforced: forcing premise vacuous", true});

  std::vector<TheoremCheck> out;
  for (int m = 0; m <= m_hat; ++m) {
    TheoremCheck c;
    c.theorem_id = mode == LowerMode::eta_equals_alpha ? TheoremId::T1_2 : TheoremId::T1_3;
    c.m = m;
    c.predicted_exponent =
        mode == LowerMode::eta_equals_alpha ? -(alpha + 0.5 * m) : -(eta + 0.5 * m * q);
    c.fitted_exponent = lower_fits[m].exponent;
    c.tolerance = tolerance;
    c.side_conditions = premises;
    c.note = std::string("mode ") + to_string(mode);
    detail::settle(c, c.fitted_exponent >= c.predicted_exponent - tolerance);
    out.push_back(std::move(c));
  }
  return out;
}

/// Reverse estimate from the fit of ||D u|| (exponent -alpha1) to ||u||.
///
/// Requires alpha1 > 1/2. Unforced, or forced with beta > alpha1 + 1/2:
/// predicted exponent -alpha1 + 1/2 compared on both sides. Forced with beta
/// within tolerance of alpha1 + 1/2: upper side only, with epsilon slack.
/// Forced with smaller beta: premises-unmet. reverse_d0 reports
/// D0 = D1 / (2 sqrt(alpha1 - 1/2)) with D1 = prefactor * sqrt(nu).
struct ReverseCheck {
  TheoremCheck check;
  double alpha1 = 0.0;
  double reverse_d0 = std::numeric_limits<double>::quiet_NaN();
};

inline ReverseCheck check_reverse(const DecayFit& du_fit, const DecayFit& u_fit,
                                  std::optional<double> beta, std::optional<double> epsilon = {},
                                  double tolerance = 0.1, double nu = 1.0) {
  ReverseCheck r;
  TheoremCheck& c = r.check;
  r.alpha1 = -du_fit.exponent;
  c.m = 0;
  c.tolerance = tolerance;
  c.fitted_exponent = u_fit.exponent;
  c.predicted_exponent = -r.alpha1 + 0.5;
  c.side_conditions.push_back(
      {"alpha1 = " + detail::fmt(r.alpha1) + " > 1/2", r.alpha1 > 0.5});

  bool two_sided = true;
  double slack = 0.0;
  c.theorem_id = TheoremId::T1_5;
  if (beta) {
    const double edge = r.alpha1 + 0.5;
    if (std::abs(*beta - edge) <= tolerance) {
      two_sided = false;
      slack = epsilon.value_or(tolerance);
      c.theorem_id = TheoremId::T1_4;
      c.side_conditions.push_back(
          {"beta = " + detail::fmt(*beta) + " = alpha1 + 1/2 (borderline, +epsilon)", true});
      c.note = "upper side only, epsilon = " + detail::fmt(slack);
    } else {
      c.side_conditions.push_back(
          {"beta = " + detail::fmt(*beta) + " > alpha1 + 1/2 = " + detail::fmt(edge), *beta > edge});
    }
  } else {
    c.side_conditions.push_back({"unforced: forcing premise vacuous", true});
  }
  if (r.alpha1 > 0.5) r.reverse_d0 = du_fit.prefactor * std::sqrt(nu) / (2.0 * std::sqrt(r.alpha1 - 0.5));

  const double d = c.fitted_exponent - c.predicted_exponent;
  const bool agrees = two_sided ? std::abs(d) <= tolerance : d <= slack + tolerance;
  detail::settle(c, agrees);
  return r;
}

struct MonotonicityViolation {
  double t = 0.0;
  double relative_increase = 0.0;
};

/// Monotonicity of z_m(t) = ||D^m u||^2 + K t^{-alpha-beta-m+1} after a_m.
struct MonotonicityReport {
  int m = 0;
  double K = 0.0;
  double a_m = 0.0;
  double tolerance = 1e-10;
  int samples_checked = 0;
  std::vector<MonotonicityViolation> violations;
  double max_violation = 0.0;
};

/// series_sq holds ||D^m u||^2. K = 2 C_m F_m / (alpha + beta + m - 1), and
/// K = 0 when F_m = 0 (beta is then ignored). Every consecutive pair of
/// samples with t > a_m where z increases by more than `tolerance` relative
/// is a violation.
inline MonotonicityReport check_monotone_zm(const TimeSeries& series_sq, int m, double alpha_fit,
                                            double beta, double c_m, double f_m, double a_m,
                                            double tolerance = 1e-10) {
  MonotonicityReport r;
  r.m = m;
  r.a_m = a_m;
  r.tolerance = tolerance;
  double expo = 0.0;
  if (f_m != 0.0) {
    const double den = alpha_fit + beta + m - 1.0;
    if (!(den > 0.0))
      throw config_error("check_monotone_zm: alpha + beta + m - 1 = " + detail::fmt(den) +
                         " is not positive, K undefined");
    r.K = 2.0 * c_m * f_m / den;
    expo = -(alpha_fit + beta + m - 1.0);
  }
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < series_sq.size(); ++i) {
    const double t = series_sq.t[i];
    if (!(t > a_m)) continue;
    const double z = series_sq.y[i] + (r.K != 0.0 ? r.K * std::pow(t, expo) : 0.0);
    ++r.samples_checked;
    if (std::isfinite(prev) && z > prev * (1.0 + tolerance)) {
      const double inc = prev > 0.0 ? z / prev - 1.0 : std::numeric_limits<double>::infinity();
      r.violations.push_back({t, inc});
      r.max_violation = std::max(r.max_violation, inc);
    }
    prev = z;
  }
  return r;
}

}  // namespace decaylab
