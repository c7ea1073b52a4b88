#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <fftw3.h>
#include <json.hpp>

#include "decaylab/analysis/ledger.hpp"
#include "decaylab/models/run.hpp"
#include "decaylab/version.hpp"

// JSON views of records and analyses. Non-finite numbers are written as the
// strings "inf", "-inf" and "nan". Wall-clock data never appears here; it is
// kept in timing.json.

namespace decaylab::report {

using json = nlohmann::json;

inline json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline json to_json(const GridSpec& g) {
  return {{"dim", g.dim}, {"N", g.points_per_axis}, {"L", g.box_length}, {"dealias_fraction", g.dealias_fraction}};
}

inline json to_json(const Window& w) { return json::array({number(w.t0), number(w.t1)}); }

inline json to_json(const DecayFit& f) {
  return {{"exponent", number(f.exponent)},
          {"prefactor", number(f.prefactor)},
          {"window", to_json(f.window)},
          {"residual", number(f.residual)},
          {"n_points", f.n_points},
          {"lower_envelope", f.lower_envelope}};
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? to_json(*v) : json(nullptr);
}

inline json to_json(const TheoremCheck& c) {
  json premises = json::array();
  for (const auto& p : c.side_conditions) premises.push_back({{"statement", p.statement}, {"holds", p.holds}});
  json j = {{"theorem_id", to_string(c.theorem_id)},
            {"m", c.m},
            {"predicted_exponent", number(c.predicted_exponent)},
            {"fitted_exponent", number(c.fitted_exponent)},
            {"tolerance", number(c.tolerance)},
            {"side_conditions", premises},
            {"verdict", to_string(c.verdict)}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline json to_json(const MonotonicityReport& r) {
  json v = json::array();
  for (const auto& x : r.violations) v.push_back({{"t", number(x.t)}, {"relative_increase", number(x.relative_increase)}});
  return {{"m", r.m},
          {"K", number(r.K)},
          {"a_m", number(r.a_m)},
          {"tolerance", number(r.tolerance)},
          {"samples_checked", r.samples_checked},
          {"violations", v},
          {"max_violation", number(r.max_violation)}};
}

inline json to_json(const HypothesisReport& h) {
  json h2 = json::array(), h3 = json::array();
  for (const auto& t : h.h2)
    h2.push_back({{"m", t.m},
                  {"samples", t.samples},
                  {"flagged", t.flagged},
                  {"kendall_tau", number(t.kendall_tau)},
                  {"max_value", number(t.max_value)},
                  {"last_value", number(t.last_value)}});
  for (const auto& e : h.h3)
    h3.push_back({{"m", e.m}, {"F", number(e.F)}, {"beta", number(e.beta)}, {"fit", optional_json(e.fit)}});
  return {{"H1", optional_json(h.h1)},
          {"H2", h2},
          {"H3", {{"forced", h.forced}, {"orders", h3}}},
          {"H4", optional_json(h.h4)},
          {"notes", h.notes}};
}

inline json to_json(const RecordAnalysis& a) {
  json fits = json::array(), lower = json::array(), checks = json::array(), mono = json::array();
  for (const auto& f : a.fits) fits.push_back(to_json(f));
  for (const auto& f : a.lower_fits) lower.push_back(to_json(f));
  for (const auto& c : a.checks) checks.push_back(to_json(c));
  for (const auto& m : a.monotonicity) mono.push_back(to_json(m));
  return {{"window", optional_json(a.window)},
          {"fits", fits},
          {"lower_fits", lower},
          {"hypotheses", to_json(a.hypotheses)},
          {"checks", checks},
          {"monotonicity", mono},
          {"reverse_D0", a.reverse_d0 ? number(*a.reverse_d0) : json(nullptr)},
          {"notes", a.notes}};
}

/// Record metadata; the samples themselves live in record.csv.
inline json record_metadata(const RunRecord& r) {
  double max_res = 0.0, max_div = 0.0, max_orth = 0.0;
  for (const auto& s : r.samples) {
    max_res = std::max(max_res, s.energy_residual);
    max_div = std::max(max_div, s.div_residual);
    max_orth = std::max(max_orth, s.orth0);
  }
  return {{"model", r.model},
          {"grid", to_json(r.grid)},
          {"nu", r.nu},
          {"mu", r.mu},
          {"m_max", r.m_max},
          {"has_b", r.has_b},
          {"forced", r.forced},
          {"status", to_string(r.status)},
          {"failure_reason", r.failure_reason},
          {"warnings", r.warnings},
          {"steps", r.steps},
          {"samples", r.samples.size()},
          {"max_energy_residual", number(max_res)},
          {"max_div_residual", number(max_div)},
          {"max_orth0", number(max_orth)}};
}

/// Inverse of record_metadata for the fields analysis needs.
inline void apply_metadata(const json& j, RunRecord& r) {
  r.model = j.value("model", r.model);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    r.grid.dim = g.value("dim", r.grid.dim);
    r.grid.points_per_axis = g.value("N", r.grid.points_per_axis);
    r.grid.box_length = g.value("L", r.grid.box_length);
    r.grid.dealias_fraction = g.value("dealias_fraction", r.grid.dealias_fraction);
  }
  r.nu = j.value("nu", r.nu);
  r.mu = j.value("mu", r.mu);
  r.forced = j.value("forced", r.forced);
  r.status = j.value("status", std::string("ok")) == "aborted" ? RunRecord::Status::aborted : RunRecord::Status::ok;
  r.failure_reason = j.value("failure_reason", std::string());
  r.steps = j.value("steps", 0L);
}

inline json versions() {
  return {{"decaylab", version_string}, {"fftw", std::string(fftw_version)}, {"schema_version", 1}};
}

}  // namespace decaylab::report
