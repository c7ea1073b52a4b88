#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "decaylab/analysis/ledger.hpp"
#include "decaylab/campaign/config.hpp"
#include "decaylab/campaign/io.hpp"
#include "decaylab/campaign/plot.hpp"
#include "decaylab/campaign/report.hpp"
#include "decaylab/heat_oracle.hpp"
#include "decaylab/initial_data.hpp"
#include "decaylab/models/run.hpp"
#include "decaylab/spectral/snapshot.hpp"

// Output layout under the campaign directory DIR:
//
//   DIR/report.json          per-run analyses, summary table, versions, seeds
//   DIR/summary.csv          run, m, theorem, fitted, predicted, verdict
//   DIR/summary.svg          grid of log-log panels, one row per run
//   DIR/timing.json          wall-clock data (kept out of report.json)
//   DIR/<run>/record.csv     time series (oracle runs: squared seminorms)
//   DIR/<run>/record.json    metadata, config echo, seed
//   DIR/<run>/analysis.json  fits, hypotheses, checks, monotonicity
//   DIR/<run>/plots/m<m>.svg one log-log plot per order

namespace decaylab {

struct RunOutcome {
  std::string name;
  ModelKind model = ModelKind::adv_diff;
  RunRecord::Status status = RunRecord::Status::ok;
  std::string failure_reason;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> seed_b;
  std::optional<RunRecord> record;
  std::vector<OracleCurve> oracle;
  RecordAnalysis analysis;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  int m_max = 3;
  json config_echo;

  bool aborted() const { return status == RunRecord::Status::aborted; }
};

struct CampaignReport {
  std::vector<RunOutcome> runs;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;

  int aborted_count() const {
    return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const auto& r) { return r.aborted(); }));
  }
  int failed_checks() const {
    int n = 0;
    for (const auto& r : runs)
      for (const auto& c : r.analysis.checks) n += c.verdict == CheckVerdict::fail;
    return n;
  }
  int monotonicity_violations() const {
    int n = 0;
    for (const auto& r : runs)
      for (const auto& m : r.analysis.monotonicity) n += static_cast<int>(m.violations.size());
    return n;
  }
  /// 0 when nothing aborted, no check failed and no monotonicity violation
  /// was found; 1 otherwise.
  int exit_code() const {
    return aborted_count() == 0 && failed_checks() == 0 && monotonicity_violations() == 0 ? 0 : 1;
  }
};

namespace campaign_detail {

inline SpectralField load_field(const InitialSource& src, const GridSpec& grid, int components,
                                bool divergence_free, std::uint64_t seed) {
  if (src.decay) {
    DecaySpec d = *src.decay;
    d.seed = seed;
    return make_decay_character_data(grid, d, components, divergence_free);
  }
  SpectralField f = snapshot::read(*src.file);
  if (!(f.grid().dim == grid.dim && f.grid().points_per_axis == grid.points_per_axis &&
        f.grid().box_length == grid.box_length))
    throw config_error("snapshot " + src.file->string() + " does not match the configured grid");
  if (f.components() != components)
    throw config_error("snapshot " + src.file->string() + " has " + std::to_string(f.components()) +
                       " components, expected " + std::to_string(components));
  SpectralField out(grid, components);
  out.values() = f.values();
  return out;
}

inline std::uint64_t resolve_seed(const InitialSource& src, std::uint64_t global, const std::string& key) {
  if (src.decay && src.seed_given) return src.decay->seed;
  return derived_seed(global, key);
}

}  // namespace campaign_detail

/// Runs one configured job: builds initial data, integrates or evaluates the
/// oracle, and analyzes the result. Instabilities and data errors are caught
/// and reported as an aborted outcome.
inline RunOutcome execute_run(const RunConfig& cfg, std::uint64_t global_seed) {
  using namespace campaign_detail;
  RunOutcome out;
  out.name = cfg.name;
  out.model = cfg.model;
  out.m_max = cfg.m_max;
  out.config_echo = cfg.echo;
  out.seed = resolve_seed(cfg.initial, global_seed, cfg.name);
  const auto wall0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.model) {
      case ModelKind::oracle: {
        RadialSpectrum spec;
        if (cfg.initial.decay) {
          spec = synthetic_spectrum(cfg.grid.dim, *cfg.initial.decay);
        } else {
          const SpectralField f = snapshot::read(*cfg.initial.file);
          if (f.grid().dim != cfg.grid.dim) throw config_error("snapshot dimension does not match the oracle dim");
          spec = radialize(f);
        }
        for (int m = 0; m <= cfg.m_max; ++m) out.oracle.push_back(oracle_curve(spec, m, cfg.nu, cfg.oracle_times));
        out.analysis = analyze_oracle(out.oracle, cfg.analysis);
        break;
      }
      case ModelKind::adv_diff: {
        AdvDiffConfig a;
        a.nu = cfg.nu;
        a.flux = cfg.flux;
        a.grid = cfg.grid;
        a.time = cfg.time;
        a.m_max = cfg.m_max;
        const SpectralField u0 = load_field(cfg.initial, cfg.grid, 1, false, out.seed);
        out.record = run_adv_diff(a, u0, cfg.forcing);
        break;
      }
      case ModelKind::mhd: {
        MHDConfig c;
        c.mu = cfg.mu;
        c.nu = cfg.nu;
        c.grid = cfg.grid;
        c.time = cfg.time;
        c.m_max = cfg.m_max;
        out.seed_b = resolve_seed(*cfg.initial_b, global_seed, cfg.name + "/b");
        const SpectralField u0 = load_field(cfg.initial, cfg.grid, 2, cfg.initial.decay.has_value(), out.seed);
        const SpectralField b0 = load_field(*cfg.initial_b, cfg.grid, 2, cfg.initial_b->decay.has_value(), *out.seed_b);
        out.record = run_mhd(c, u0, b0, cfg.forcing);
        break;
      }
    }
    if (out.record) {
      out.status = out.record->status;
      out.failure_reason = out.record->failure_reason;
      out.warnings = out.record->warnings;
      out.analysis = analyze_record(*out.record, cfg.analysis);
    }
  } catch (const std::exception& e) {
    out.status = RunRecord::Status::aborted;
    out.failure_reason = e.what();
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return out;
}

/// Norm series per order for plotting; oracle curves are square-rooted.
inline std::vector<plot::Panel> panels_for(const RunOutcome& r) {
  std::vector<plot::Panel> panels;
  for (int m = 0; m <= r.m_max; ++m) {
    plot::Panel p;
    p.title = r.name + "  ||D^" + std::to_string(m) + (r.model == ModelKind::mhd ? " (u,b)||" : " u||");
    if (r.record && !r.record->samples.empty()) {
      p.series = norm_series(*r.record, m);
    } else if (m < static_cast<int>(r.oracle.size())) {
      p.series.t = r.oracle[m].times;
      for (double v : r.oracle[m].values) p.series.y.push_back(std::sqrt(v));
    }
    if (r.aborted()) p.placeholder = "run aborted: " + r.failure_reason;
    else if (p.series.empty()) p.placeholder = "missing series";
    if (m < static_cast<int>(r.analysis.fits.size())) p.fit = r.analysis.fits[m];
    for (const auto& c : r.analysis.checks)
      if (c.theorem_id == TheoremId::T1_1 && c.m == m) p.predicted_exponent = c.predicted_exponent;
    panels.push_back(std::move(p));
  }
  return panels;
}

inline json outcome_json(const RunOutcome& r) {
  json j = {{"name", r.name},
            {"model", to_string(r.model)},
            {"status", to_string(r.status)},
            {"failure_reason", r.failure_reason},
            {"seed", r.seed},
            {"warnings", r.warnings},
            {"config", r.config_echo},
            {"analysis", report::to_json(r.analysis)}};
  if (r.seed_b) j["seed_b"] = *r.seed_b;
  if (r.record) j["record"] = report::record_metadata(*r.record);
  return j;
}

inline std::vector<json> summary_rows(const CampaignReport& rep) {
  std::vector<json> rows;
  for (const auto& r : rep.runs)
    for (const auto& c : r.analysis.checks)
      rows.push_back({{"run", r.name},
                      {"m", c.m},
                      {"theorem", to_string(c.theorem_id)},
                      {"fitted_exponent", report::number(c.fitted_exponent)},
                      {"predicted_exponent", report::number(c.predicted_exponent)},
                      {"verdict", to_string(c.verdict)}});
  return rows;
}

inline json report_json(const CampaignReport& rep) {
  json runs = json::array();
  for (const auto& r : rep.runs) runs.push_back(outcome_json(r));
  return {{"versions", report::versions()},
          {"seed", rep.seed},
          {"runs", runs},
          {"summary", summary_rows(rep)},
          {"totals",
           {{"runs", rep.runs.size()},
            {"aborted", rep.aborted_count()},
            {"failed_checks", rep.failed_checks()},
            {"monotonicity_violations", rep.monotonicity_violations()},
            {"exit_code", rep.exit_code()}}}};
}

inline std::string summary_csv(const CampaignReport& rep) {
  std::ostringstream os;
  os << "run,m,theorem,fitted_exponent,predicted_exponent,verdict\n";
  for (const auto& r : rep.runs)
    for (const auto& c : r.analysis.checks)
      os << r.name << "," << c.m << "," << to_string(c.theorem_id) << "," << io::format_double(c.fitted_exponent)
         << "," << io::format_double(c.predicted_exponent) << "," << to_string(c.verdict) << "\n";
  return os.str();
}

/// Writes the per-run directory. Only the worker owning the run calls this.
inline void write_run_outputs(const RunOutcome& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "plots");
  std::ostringstream csv;
  if (r.record) io::write_record_csv(csv, *r.record);
  else if (!r.oracle.empty()) io::write_oracle_csv(csv, r.oracle);
  if (r.record || !r.oracle.empty()) io::write_file(dir / "record.csv", csv.str());

  json meta = r.record ? report::record_metadata(*r.record) : json::object();
  if (!r.record) {
    meta["model"] = to_string(r.model);
    meta["status"] = to_string(r.status);
    meta["failure_reason"] = r.failure_reason;
    meta["m_max"] = r.m_max;
  }
  meta["name"] = r.name;
  meta["seed"] = r.seed;
  if (r.seed_b) meta["seed_b"] = *r.seed_b;
  meta["config"] = r.config_echo;
  io::write_file(dir / "record.json", meta.dump(2) + "\n");
  io::write_file(dir / "analysis.json", report::to_json(r.analysis).dump(2) + "\n");
  const auto panels = panels_for(r);
  for (std::size_t m = 0; m < panels.size(); ++m)
    io::write_file(dir / "plots" / ("m" + std::to_string(m) + ".svg"), plot::render(panels[m]));
}

/// Writes report.json, summary.csv, summary.svg and, when requested,
/// timing.json.
inline void write_campaign_outputs(const CampaignReport& rep, const std::filesystem::path& out,
                                   bool timing_file = true) {
  std::filesystem::create_directories(out);
  io::write_file(out / "report.json", report_json(rep).dump(2) + "\n");
  io::write_file(out / "summary.csv", summary_csv(rep));
  std::vector<std::vector<plot::Panel>> rows;
  for (const auto& r : rep.runs) rows.push_back(panels_for(r));
  io::write_file(out / "summary.svg", plot::render_grid(rows));
  if (!timing_file) return;
  json timing = {{"total_seconds", rep.wall_seconds}, {"runs", json::array()}};
  for (const auto& r : rep.runs) {
    json t = {{"name", r.name}, {"wall_seconds", r.wall_seconds}};
    if (r.record) t["steps"] = r.record->steps;
    timing["runs"].push_back(t);
  }
  io::write_file(out / "timing.json", timing.dump(2) + "\n");
}

/// Executes every run with up to `jobs` workers. Each worker owns its run's
/// output directory; results are collected by index so the report order is
/// the config order regardless of scheduling.
inline CampaignReport run_campaign(const CampaignConfig& cfg, const std::filesystem::path& out, int jobs) {
  const auto wall0 = std::chrono::steady_clock::now();
  CampaignReport rep;
  rep.seed = cfg.seed;
  rep.runs.resize(cfg.runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.runs.size(); i = next++) {
      RunOutcome r = execute_run(cfg.runs[i], cfg.seed);
      try {
        write_run_outputs(r, out / r.name);
      } catch (const std::exception& e) {
        r.warnings.push_back(std::string("output error: ") + e.what());
      }
      rep.runs[i] = std::move(r);
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cfg.runs.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  write_campaign_outputs(rep, out);
  return rep;
}

/// Rebuilds an outcome from a run directory written by write_run_outputs and
/// re-runs the analysis with the run's configured policy, optionally with a
/// different tolerance.
inline RunOutcome load_run_directory(const std::filesystem::path& dir, std::optional<double> tolerance = {}) {
  RunOutcome r;
  r.name = dir.filename().string();
  const json meta = parse_json_text(io::read_file(dir / "record.json"), (dir / "record.json").string());
  r.config_echo = meta.value("config", json::object());
  r.seed = meta.value("seed", std::uint64_t{0});
  if (meta.contains("seed_b")) r.seed_b = meta["seed_b"].get<std::uint64_t>();
  const std::string model = meta.value("model", std::string("adv_diff"));
  r.model = model == "mhd" ? ModelKind::mhd : model == "oracle" ? ModelKind::oracle : ModelKind::adv_diff;
  r.status = meta.value("status", std::string("ok")) == "aborted" ? RunRecord::Status::aborted : RunRecord::Status::ok;
  r.failure_reason = meta.value("failure_reason", std::string());
  r.m_max = meta.value("m_max", 3);
  r.warnings = meta.value("warnings", std::vector<std::string>{});

  AnalysisPolicy policy;
  if (r.config_echo.contains("analysis"))
    policy = config_detail::policy(r.config_echo["analysis"], "analysis", policy);
  if (tolerance) policy.tolerance = *tolerance;

  const auto csv_path = dir / "record.csv";
  if (!std::filesystem::exists(csv_path)) return r;
  std::ifstream csv(csv_path);
  if (r.model == ModelKind::oracle) {
    r.oracle = io::read_oracle_csv(csv, r.config_echo.value("nu", 1.0), csv_path.string());
    r.m_max = static_cast<int>(r.oracle.size()) - 1;
    r.analysis = analyze_oracle(r.oracle, policy);
  } else {
    RunRecord rec;
    io::read_record_csv(csv, rec, csv_path.string());
    report::apply_metadata(meta, rec);
    rec.has_b = r.model == ModelKind::mhd;
    r.m_max = rec.m_max;
    r.analysis = analyze_record(rec, policy);
    r.record = std::move(rec);
  }
  return r;
}

}  // namespace decaylab
