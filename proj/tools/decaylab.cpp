// decaylab command-line front end.
//
// Exit codes: 0 when no run aborted and every theorem check passed or had
// unmet premises; 1 on a failed check, a monotonicity violation or an
// aborted run; 2 on configuration errors.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "decaylab/campaign/campaign.hpp"
#include "decaylab/campaign/config.hpp"
#include "decaylab/campaign/io.hpp"
#include "decaylab/heat_oracle.hpp"
#include "decaylab/initial_data.hpp"
#include "decaylab/spectral/snapshot.hpp"

namespace fs = std::filesystem;
using namespace decaylab;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_config = 2;

void print_summary(const CampaignReport& rep, std::ostream& os) {
  for (const auto& r : rep.runs) {
    os << r.name << " [" << to_string(r.model) << "] " << to_string(r.status);
    if (r.aborted()) os << ": " << r.failure_reason;
    os << "\n";
    for (const auto& w : r.warnings) os << "  warning: " << w << "\n";
    for (const auto& n : r.analysis.notes) os << "  note: " << n << "\n";
    for (const auto& c : r.analysis.checks) {
      char line[160];
      std::snprintf(line, sizeof line, "  %-5s m=%d fitted %+.4f predicted %+.4f  %s\n", to_string(c.theorem_id), c.m,
                    c.fitted_exponent, c.predicted_exponent, to_string(c.verdict));
      os << line;
    }
    for (const auto& m : r.analysis.monotonicity)
      if (!m.violations.empty())
        os << "  monotonicity m=" << m.m << ": " << m.violations.size() << " violation(s), max "
           << m.max_violation << "\n";
  }
}

/// A run config file is a single run object carrying schema_version.
RunConfig load_run_file(const fs::path& path) {
  const std::string text = io::read_file(path);
  json j = parse_json_text(text, path.string());
  check_schema_version(j, path.string());
  j.erase("schema_version");
  RunConfig r = parse_run_config(j);
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  for (InitialSource* s : {&r.initial, r.initial_b ? &*r.initial_b : nullptr})
    if (s && s->file && s->file->is_relative()) s->file = base / *s->file;
  return r;
}

void override_tolerance(RunConfig& r, std::optional<double> tol) {
  if (!tol) return;
  if (!(*tol > 0.0)) throw config_error("--tolerance must be positive");
  r.analysis.tolerance = *tol;
}

int finish(const CampaignReport& rep) {
  print_summary(rep, std::cout);
  return rep.exit_code() == 0 ? exit_ok : exit_check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decay-rate laboratory for dissipative PDEs on periodic boxes"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write initial data with a prescribed decay character");
  int g_dim = 2, g_n = 256, g_components = 1;
  double g_l = 200.0, g_rstar = 0.0, g_rho0 = 1.0, g_amp = 1.0;
  std::uint64_t g_seed = 0;
  bool g_divfree = false, g_zero_phases = false;
  std::string g_out;
  gen->add_option("--n,--dim", g_dim, "spatial dimension (1 or 2)")->capture_default_str();
  gen->add_option("--N", g_n, "points per axis")->capture_default_str();
  gen->add_option("--L", g_l, "box length")->capture_default_str();
  gen->add_option("--r-star", g_rstar, "decay character r*")->capture_default_str();
  gen->add_option("--rho0", g_rho0, "spectral cutoff radius")->capture_default_str();
  gen->add_option("--amplitude", g_amp, "spectral amplitude A")->capture_default_str();
  gen->add_option("--components", g_components, "1 (scalar) or 2 (vector)")->capture_default_str();
  gen->add_option("--seed", g_seed, "phase seed")->capture_default_str();
  gen->add_flag("--divergence-free", g_divfree, "Leray-project vector data");
  gen->add_flag("--zero-phases", g_zero_phases, "use unit real phases instead of random ones");
  gen->add_option("--out", g_out, "snapshot path; a JSON sidecar is written to <out>.json")->required();

  // run
  auto* run = app.add_subcommand("run", "integrate one model run");
  std::string r_config, r_out = "out";
  std::optional<std::uint64_t> r_seed;
  std::optional<double> r_tol;
  run->add_option("--config", r_config, "run config JSON")->required();
  run->add_option("--out", r_out, "output directory")->capture_default_str();
  run->add_option("--seed", r_seed, "global seed for derived data seeds");
  run->add_option("--tolerance", r_tol, "exponent tolerance for the checks");

  // oracle
  auto* orc = app.add_subcommand("oracle", "tabulate heat-semigroup seminorms");
  std::string o_config, o_out = "oracle.csv", o_snapshot;
  int o_dim = 2, o_mmax = 3, o_count = 41;
  double o_rstar = 0.0, o_rho0 = 1.0, o_amp = 1.0, o_nu = 1.0, o_t0 = 100.0, o_t1 = 1e4;
  orc->add_option("--config", o_config, "oracle run config JSON (overrides the flags)");
  orc->add_option("--snapshot", o_snapshot, "radialize this snapshot instead of a synthetic spectrum");
  orc->add_option("--dim", o_dim)->capture_default_str();
  orc->add_option("--r-star", o_rstar)->capture_default_str();
  orc->add_option("--rho0", o_rho0)->capture_default_str();
  orc->add_option("--amplitude", o_amp)->capture_default_str();
  orc->add_option("--nu", o_nu)->capture_default_str();
  orc->add_option("--t0", o_t0)->capture_default_str();
  orc->add_option("--t1", o_t1)->capture_default_str();
  orc->add_option("--count", o_count, "log-spaced sample count")->capture_default_str();
  orc->add_option("--m-max", o_mmax)->capture_default_str();
  orc->add_option("--out", o_out, "CSV path")->capture_default_str();

  // analyze
  auto* ana = app.add_subcommand("analyze", "fit and check a record or oracle CSV");
  std::string a_input, a_out;
  std::optional<double> a_tol;
  ana->add_option("--input", a_input, "run directory or record CSV")->required();
  ana->add_option("--out", a_out, "output directory (default: the input's directory)");
  ana->add_option("--tolerance", a_tol, "exponent tolerance");
  ana->add_option("--config", a_input, "alias of --input");

  // report
  auto* rep = app.add_subcommand("report", "aggregate run directories into a campaign report");
  std::string p_input, p_out;
  std::optional<double> p_tol;
  rep->add_option("--input", p_input, "campaign output directory")->required();
  rep->add_option("--out", p_out, "report directory (default: the input)");
  rep->add_option("--tolerance", p_tol, "exponent tolerance");

  // campaign
  auto* camp = app.add_subcommand("campaign", "run a batch of configured runs");
  std::string c_config, c_out;
  std::optional<int> c_jobs;
  std::optional<std::uint64_t> c_seed;
  std::optional<double> c_tol;
  camp->add_option("--config", c_config, "campaign config JSON")->required();
  camp->add_option("--out", c_out, "output directory (default: the config's output_dir)");
  camp->add_option("--jobs", c_jobs, "parallel runs");
  camp->add_option("--seed", c_seed, "global seed");
  camp->add_option("--tolerance", c_tol, "exponent tolerance for every run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*gen) {
      GridSpec g{g_dim, g_n, g_l};
      g.validate();
      DecaySpec d{g_rstar, g_amp, g_rho0, !g_zero_phases, g_seed};
      const SpectralField f = make_decay_character_data(g, d, g_components, g_divfree);
      snapshot::write(g_out, f);
      json side = {{"schema_version", schema_version},
                   {"grid", report::to_json(g)},
                   {"components", g_components},
                   {"divergence_free", g_divfree},
                   {"decay",
                    {{"r_star", d.r_star},
                     {"amplitude", d.amplitude},
                     {"cutoff_radius", d.cutoff_radius},
                     {"randomize_phases", d.randomize_phases},
                     {"seed", d.seed}}}};
      io::write_file(g_out + ".json", side.dump(2) + "\n");
      std::cout << "wrote " << g_out << "\n";
      return exit_ok;
    }

    if (*run) {
      RunConfig r = load_run_file(r_config);
      override_tolerance(r, r_tol);
      CampaignReport report;
      report.seed = r_seed.value_or(0);
      report.runs.push_back(execute_run(r, report.seed));
      write_run_outputs(report.runs[0], fs::path(r_out));
      return finish(report);
    }

    if (*orc) {
      std::vector<OracleCurve> curves;
      if (!o_config.empty()) {
        RunConfig r = load_run_file(o_config);
        if (r.model != ModelKind::oracle) throw config_error(o_config + ": model must be \"oracle\"");
        RunOutcome out = execute_run(r, 0);
        if (out.aborted()) throw config_error(out.failure_reason);
        curves = out.oracle;
      } else {
        if (!(o_t0 > 0.0 && o_t1 > o_t0) || o_count < 2) throw config_error("oracle: need 0 < t0 < t1 and count >= 2");
        const RadialSpectrum spec = o_snapshot.empty()
                                        ? synthetic_spectrum(o_dim, DecaySpec{o_rstar, o_amp, o_rho0, false, 0})
                                        : radialize(snapshot::read(o_snapshot));
        const auto times = log_spaced(o_t0, o_t1, o_count);
        for (int m = 0; m <= o_mmax; ++m) curves.push_back(oracle_curve(spec, m, o_nu, times));
      }
      std::ostringstream os;
      io::write_oracle_csv(os, curves);
      io::write_file(o_out, os.str());
      std::cout << "wrote " << o_out << "\n";
      return exit_ok;
    }

    if (*ana) {
      fs::path in(a_input);
      fs::path dir = fs::is_directory(in) ? in : in.parent_path();
      if (dir.empty()) dir = ".";
      CampaignReport report;
      if (fs::exists(dir / "record.json")) {
        report.runs.push_back(load_run_directory(dir, a_tol));
      } else {
        // bare CSV without metadata: analyze with the full-range window
        std::ifstream f(in);
        if (!f) throw config_error("cannot open " + in.string());
        RunOutcome o;
        o.name = in.stem().string();
        AnalysisPolicy p;
        const bool oracle = io::is_oracle_csv(in);
        if (oracle) p.tolerance = config_detail::oracle_default_tolerance;
        if (a_tol) p.tolerance = *a_tol;
        if (oracle) {
          o.model = ModelKind::oracle;
          o.oracle = io::read_oracle_csv(f, 1.0, in.string());
          o.m_max = static_cast<int>(o.oracle.size()) - 1;
          o.analysis = analyze_oracle(o.oracle, p);
        } else {
          RunRecord rec;
          io::read_record_csv(f, rec, in.string());
          rec.model = rec.has_b ? "mhd" : "adv_diff";
          o.model = rec.has_b ? ModelKind::mhd : ModelKind::adv_diff;
          const TimeSeries s = norm_series(rec, 0);
          p.window = auto_window(s, std::nullopt, 1.0, p.t_star);
          o.m_max = rec.m_max;
          o.analysis = analyze_record(rec, p);
          o.record = std::move(rec);
        }
        report.runs.push_back(std::move(o));
      }
      const fs::path out = a_out.empty() ? dir : fs::path(a_out);
      const RunOutcome& o = report.runs[0];
      io::write_file(out / "analysis.json", report::to_json(o.analysis).dump(2) + "\n");
      const auto panels = panels_for(o);
      for (std::size_t m = 0; m < panels.size(); ++m)
        io::write_file(out / "plots" / ("m" + std::to_string(m) + ".svg"), plot::render(panels[m]));
      return finish(report);
    }

    if (*rep) {
      const fs::path in(p_input);
      if (!fs::is_directory(in)) throw config_error(p_input + " is not a directory");
      CampaignReport report;
      std::vector<fs::path> dirs;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_directory() && fs::exists(e.path() / "record.json")) dirs.push_back(e.path());
      std::sort(dirs.begin(), dirs.end());
      if (fs::exists(in / "report.json")) {
        // keep the campaign's run order and seed when a report already exists
        const json old = parse_json_text(io::read_file(in / "report.json"), (in / "report.json").string());
        report.seed = old.value("seed", std::uint64_t{0});
        std::vector<fs::path> ordered;
        for (const auto& r : old.value("runs", json::array())) {
          const fs::path d = in / r.value("name", std::string());
          if (std::find(dirs.begin(), dirs.end(), d) != dirs.end()) ordered.push_back(d);
        }
        for (const auto& d : dirs)
          if (std::find(ordered.begin(), ordered.end(), d) == ordered.end()) ordered.push_back(d);
        dirs = ordered;
      }
      for (const auto& d : dirs) report.runs.push_back(load_run_directory(d, p_tol));
      write_campaign_outputs(report, p_out.empty() ? in : fs::path(p_out), false);
      return finish(report);
    }

    if (*camp) {
      CampaignConfig cfg = load_campaign(c_config);
      if (c_seed) cfg.seed = *c_seed;
      if (c_jobs) {
        if (*c_jobs < 1) throw config_error("--jobs must be at least 1");
        cfg.jobs = *c_jobs;
      }
      if (c_tol) {
        if (!(*c_tol > 0.0)) throw config_error("--tolerance must be positive");
        for (auto& r : cfg.runs) r.analysis.tolerance = *c_tol;
      }
      const fs::path out = c_out.empty() ? cfg.output_dir : fs::path(c_out);
      const CampaignReport report = run_campaign(cfg, out, cfg.jobs);
      std::cout << "wrote " << (out / "report.json").string() << "\n";
      return finish(report);
    }
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_check_failed;
  }
  return exit_ok;
}
