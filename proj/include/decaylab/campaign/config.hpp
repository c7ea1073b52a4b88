#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "decaylab/analysis/ledger.hpp"
#include "decaylab/campaign/io.hpp"
#include "decaylab/initial_data.hpp"
#include "decaylab/models/forcing.hpp"
#include "decaylab/models/run.hpp"

// Campaign configuration, JSON, schema_version 1.
//
// {
//   "schema_version": 1,
//   "output_dir": "out",          optional, --out overrides
//   "jobs": 1,                    optional, --jobs overrides
//   "seed": 0,                    optional, --seed overrides
//   "analysis": { ...policy... }, optional defaults for every run
//   "runs": [ run, ... ]
// }
//
// run:
//   "name": unique string (also the output subdirectory)
//   "model": "adv_diff" | "mhd" | "oracle"
//   "grid": {"dim": 2, "N": 256, "L": 200.0, "dealias_fraction": 2/3}
//   "nu": 1.0, "mu": 1.0 (mhd), "flux": [[c0, c1, ...], [c0, ...]] (adv_diff)
//   "initial": {"decay": decay} | {"file": "snapshot.bin"}
//   "initial_b": same shape (mhd)
//   "forcing": {"beta", "profile": "gaussian"|"vortex", "amplitude", "width",
//               "t_on", "self_similar"}
//   "time": {"dt", "cfl", "t_end", "samples": [t...] | {"log": [t0, t1, count]}}
//   "m_max": 3
//   "analysis": policy overrides
// oracle runs use "dim", "nu", "initial" and "times" (same forms as samples).
//
// decay: {"r_star", "amplitude", "cutoff_radius", "randomize_phases", "seed"}
// policy: {"tolerance", "t_star", "a_m", "bins_per_decade", "window": [t0, t1],
//          "monotone_tolerance", "epsilon"}

namespace decaylab {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

enum class ModelKind { adv_diff, mhd, oracle };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::adv_diff: return "adv_diff";
    case ModelKind::mhd: return "mhd";
    case ModelKind::oracle: return "oracle";
  }
  return "?";
}

/// Initial data from a recipe or a snapshot file.
struct InitialSource {
  std::optional<DecaySpec> decay;
  std::optional<std::filesystem::path> file;
  bool seed_given = false;
};

struct RunConfig {
  std::string name;
  ModelKind model = ModelKind::adv_diff;
  GridSpec grid{};
  double nu = 1.0;
  double mu = 1.0;
  PolyFlux flux = PolyFlux::burgers();
  InitialSource initial;
  std::optional<InitialSource> initial_b;
  std::optional<ForcingSpec> forcing;
  TimePolicy time{};
  std::vector<double> oracle_times;
  int m_max = 3;
  AnalysisPolicy analysis{};
  json echo;  // the run object as given
};

struct CampaignConfig {
  std::vector<RunConfig> runs;
  std::filesystem::path output_dir = "out";
  int jobs = 1;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir = ".";  // relative snapshot paths resolve here
};

/// 64-bit FNV-1a, used to derive per-run seeds from names.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t derived_seed(std::uint64_t global, const std::string& key) {
  return global ^ fnv1a(key);
}

namespace config_detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const char* type_name(const json& j) { return j.type_name(); }

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw config_error("config field '" + path + "': " + msg);
}

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(join(path, key), "missing required field");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, std::string("expected a number, got ") + type_name(j));
  return j.get<double>();
}

inline long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, std::string("expected an integer, got ") + type_name(j));
  return j.get<long>();
}

inline std::uint64_t seed(const json& j, const std::string& path) {
  // Parsed text yields unsigned integers, but json built in code may be signed.
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    fail(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, std::string("expected true or false, got ") + type_name(j));
  return j.get<bool>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, std::string("expected a string, got ") + type_name(j));
  return j.get<std::string>();
}

template <class F>
void optional_field(const json& j, const std::string& key, const std::string& path, F&& f) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it != j.end()) f(*it, join(path, key));
}

/// Rejects keys outside the allowed set so typos surface as errors.
inline void known_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown field");
}

inline std::vector<double> time_list(const json& j, const std::string& path) {
  if (j.is_array()) {
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }
  if (j.is_object()) {
    known_keys(j, path, {"log"});
    const json& l = require(j, "log", path);
    if (!l.is_array() || l.size() != 3) fail(join(path, "log"), "expected [t0, t1, count]");
    const double t0 = number(l[0], join(path, "log") + "[0]");
    const double t1 = number(l[1], join(path, "log") + "[1]");
    const long n = integer(l[2], join(path, "log") + "[2]");
    if (!(t0 > 0.0) || !(t1 > t0) || n < 2) fail(join(path, "log"), "need 0 < t0 < t1 and count >= 2");
    return log_spaced(t0, t1, static_cast<int>(n));
  }
  fail(path, "expected a list of times or {\"log\": [t0, t1, count]}");
}

inline AnalysisPolicy policy(const json& j, const std::string& path, AnalysisPolicy p) {
  known_keys(j, path,
             {"tolerance", "t_star", "a_m", "bins_per_decade", "window", "monotone_tolerance", "epsilon",
              "horizon_c"});
  optional_field(j, "tolerance", path, [&](const json& v, const std::string& q) { p.tolerance = number(v, q); });
  optional_field(j, "t_star", path, [&](const json& v, const std::string& q) { p.t_star = number(v, q); });
  optional_field(j, "a_m", path, [&](const json& v, const std::string& q) { p.a_m = number(v, q); });
  optional_field(j, "bins_per_decade", path,
                 [&](const json& v, const std::string& q) { p.bins_per_decade = static_cast<int>(integer(v, q)); });
  optional_field(j, "monotone_tolerance", path,
                 [&](const json& v, const std::string& q) { p.monotone_tolerance = number(v, q); });
  optional_field(j, "epsilon", path, [&](const json& v, const std::string& q) { p.epsilon = number(v, q); });
  optional_field(j, "horizon_c", path, [&](const json& v, const std::string& q) { p.horizon_c = number(v, q); });
  optional_field(j, "window", path, [&](const json& v, const std::string& q) {
    if (!v.is_array() || v.size() != 2) fail(q, "expected [t0, t1]");
    p.window = Window{number(v[0], q + "[0]"), number(v[1], q + "[1]")};
    if (!(p.window->t1 > p.window->t0)) fail(q, "window end must exceed its start");
  });
  if (!(p.tolerance > 0.0)) fail(join(path, "tolerance"), "must be positive");
  return p;
}

/// Inverse of policy(): every field, so a run echo reproduces its analysis.
inline json policy_json(const AnalysisPolicy& p) {
  json j{{"tolerance", p.tolerance},
         {"t_star", p.t_star},
         {"a_m", p.a_m},
         {"bins_per_decade", p.bins_per_decade},
         {"monotone_tolerance", p.monotone_tolerance},
         {"horizon_c", p.horizon_c}};
  if (p.window) j["window"] = {p.window->t0, p.window->t1};
  if (p.epsilon) j["epsilon"] = *p.epsilon;
  return j;
}

inline DecaySpec decay(const json& j, const std::string& path, bool& seed_given) {
  known_keys(j, path, {"r_star", "amplitude", "cutoff_radius", "randomize_phases", "seed"});
  DecaySpec d;
  d.r_star = number(require(j, "r_star", path), join(path, "r_star"));
  optional_field(j, "amplitude", path, [&](const json& v, const std::string& q) { d.amplitude = number(v, q); });
  optional_field(j, "cutoff_radius", path,
                 [&](const json& v, const std::string& q) { d.cutoff_radius = number(v, q); });
  optional_field(j, "randomize_phases", path,
                 [&](const json& v, const std::string& q) { d.randomize_phases = boolean(v, q); });
  seed_given = false;
  optional_field(j, "seed", path, [&](const json& v, const std::string& q) {
    d.seed = seed(v, q);
    seed_given = true;
  });
  return d;
}

inline InitialSource initial(const json& j, const std::string& path) {
  known_keys(j, path, {"decay", "file"});
  InitialSource s;
  const bool has_decay = j.contains("decay"), has_file = j.contains("file");
  if (has_decay == has_file) fail(path, "give exactly one of 'decay' or 'file'");
  if (has_decay) s.decay = decay(j["decay"], join(path, "decay"), s.seed_given);
  if (has_file) s.file = string(j["file"], join(path, "file"));
  return s;
}

inline GridSpec grid(const json& j, const std::string& path) {
  known_keys(j, path, {"dim", "N", "L", "dealias_fraction"});
  GridSpec g;
  g.dim = static_cast<int>(integer(require(j, "dim", path), join(path, "dim")));
  g.points_per_axis = static_cast<int>(integer(require(j, "N", path), join(path, "N")));
  g.box_length = number(require(j, "L", path), join(path, "L"));
  optional_field(j, "dealias_fraction", path,
                 [&](const json& v, const std::string& q) { g.dealias_fraction = number(v, q); });
  try {
    g.validate();
  } catch (const config_error& e) {
    fail(path, e.what());
  }
  return g;
}

inline ForcingSpec forcing(const json& j, const std::string& path) {
  known_keys(j, path, {"beta", "profile", "amplitude", "width", "t_on", "self_similar"});
  ForcingSpec f;
  optional_field(j, "beta", path, [&](const json& v, const std::string& q) { f.beta = number(v, q); });
  optional_field(j, "profile", path, [&](const json& v, const std::string& q) {
    const std::string k = string(v, q);
    if (k == "gaussian") f.profile.kind = ForcingProfile::Kind::gaussian;
    else if (k == "vortex") f.profile.kind = ForcingProfile::Kind::vortex;
    else fail(q, "expected \"gaussian\" or \"vortex\", got \"" + k + "\"");
  });
  optional_field(j, "amplitude", path, [&](const json& v, const std::string& q) { f.profile.amplitude = number(v, q); });
  optional_field(j, "width", path, [&](const json& v, const std::string& q) { f.profile.width = number(v, q); });
  optional_field(j, "t_on", path, [&](const json& v, const std::string& q) { f.t_on = number(v, q); });
  optional_field(j, "self_similar", path,
                 [&](const json& v, const std::string& q) { f.self_similar = boolean(v, q); });
  return f;
}

inline TimePolicy time(const json& j, const std::string& path) {
  known_keys(j, path, {"dt", "cfl", "t_end", "samples"});
  TimePolicy t;
  optional_field(j, "dt", path, [&](const json& v, const std::string& q) { t.dt_max = number(v, q); });
  optional_field(j, "cfl", path, [&](const json& v, const std::string& q) { t.cfl = number(v, q); });
  t.t_end = number(require(j, "t_end", path), join(path, "t_end"));
  optional_field(j, "samples", path, [&](const json& v, const std::string& q) { t.sample_times = time_list(v, q); });
  if (t.sample_times.empty()) t.sample_times = log_spaced(std::min(0.1, t.t_end), t.t_end, 31);
  try {
    t.validate();
  } catch (const config_error& e) {
    fail(path, e.what());
  }
  return t;
}

inline PolyFlux flux(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || j.size() > 2) fail(path, "expected [[coefficients axis 0], [axis 1]]");
  PolyFlux f;
  f.coeffs = {};
  for (std::size_t a = 0; a < j.size(); ++a) {
    const std::string q = path + "[" + std::to_string(a) + "]";
    if (!j[a].is_array()) fail(q, "expected a list of polynomial coefficients");
    for (std::size_t i = 0; i < j[a].size(); ++i)
      f.coeffs[a].push_back(number(j[a][i], q + "[" + std::to_string(i) + "]"));
  }
  return f;
}

/// Oracle curves are exact, so their exponent tolerance defaults tighter than
/// nonlinear runs unless a tolerance is configured at campaign or run level.
inline constexpr double oracle_default_tolerance = 0.05;

inline RunConfig run(const json& j, const std::string& path, const AnalysisPolicy& defaults,
                     bool default_tolerance_given = false) {
  known_keys(j, path,
             {"name", "model", "grid", "nu", "mu", "flux", "initial", "initial_b", "forcing", "time", "m_max",
              "analysis", "dim", "times"});
  RunConfig r;
  r.echo = j;
  r.name = string(require(j, "name", path), join(path, "name"));
  if (r.name.empty() || r.name.find_first_of("/\\") != std::string::npos || r.name == "." || r.name == "..")
    fail(join(path, "name"), "must be a nonempty plain file name");
  const std::string model = string(require(j, "model", path), join(path, "model"));
  if (model == "adv_diff") r.model = ModelKind::adv_diff;
  else if (model == "mhd") r.model = ModelKind::mhd;
  else if (model == "oracle") r.model = ModelKind::oracle;
  else fail(join(path, "model"), "expected \"adv_diff\", \"mhd\" or \"oracle\", got \"" + model + "\"");

  optional_field(j, "nu", path, [&](const json& v, const std::string& q) { r.nu = number(v, q); });
  optional_field(j, "m_max", path, [&](const json& v, const std::string& q) { r.m_max = static_cast<int>(integer(v, q)); });
  if (!(r.nu > 0.0)) fail(join(path, "nu"), "must be positive");
  if (r.m_max < 1 || r.m_max > 8) fail(join(path, "m_max"), "must lie in [1, 8]");
  r.initial = initial(require(j, "initial", path), join(path, "initial"));
  r.analysis = defaults;
  optional_field(j, "analysis", path, [&](const json& v, const std::string& q) { r.analysis = policy(v, q, defaults); });
  const bool tolerance_given =
      default_tolerance_given || (j.contains("analysis") && j["analysis"].contains("tolerance"));
  if (r.model == ModelKind::oracle && !tolerance_given) r.analysis.tolerance = oracle_default_tolerance;
  r.echo["analysis"] = policy_json(r.analysis);

  if (r.model == ModelKind::oracle) {
    for (const char* k : {"grid", "mu", "flux", "initial_b", "forcing", "time"})
      if (j.contains(k)) fail(join(path, k), "not used by oracle runs");
    r.grid.dim = static_cast<int>(integer(require(j, "dim", path), join(path, "dim")));
    if (r.grid.dim != 1 && r.grid.dim != 2) fail(join(path, "dim"), "must be 1 or 2");
    r.oracle_times = time_list(require(j, "times", path), join(path, "times"));
    return r;
  }
  for (const char* k : {"dim", "times"})
    if (j.contains(k)) fail(join(path, k), "only used by oracle runs");
  r.grid = grid(require(j, "grid", path), join(path, "grid"));
  r.time = time(require(j, "time", path), join(path, "time"));
  optional_field(j, "forcing", path, [&](const json& v, const std::string& q) { r.forcing = forcing(v, q); });
  if (r.model == ModelKind::adv_diff) {
    if (j.contains("mu")) fail(join(path, "mu"), "only used by mhd runs");
    if (j.contains("initial_b")) fail(join(path, "initial_b"), "only used by mhd runs");
    optional_field(j, "flux", path, [&](const json& v, const std::string& q) { r.flux = flux(v, q); });
    try {
      r.flux.validate(r.grid.dim);
    } catch (const config_error& e) {
      fail(join(path, "flux"), e.what());
    }
  } else {
    if (j.contains("flux")) fail(join(path, "flux"), "only used by adv_diff runs");
    optional_field(j, "mu", path, [&](const json& v, const std::string& q) { r.mu = number(v, q); });
    if (!(r.mu > 0.0)) fail(join(path, "mu"), "must be positive");
    if (r.grid.dim != 2) fail(join(path, "grid.dim"), "mhd runs need dim 2");
    r.initial_b = initial(require(j, "initial_b", path), join(path, "initial_b"));
  }
  if (r.forcing) {
    try {
      r.forcing->validate(r.grid);
    } catch (const config_error& e) {
      fail(join(path, "forcing"), e.what());
    }
  }
  return r;
}

/// 1-based line and column of a byte offset.
inline std::pair<int, int> line_col(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace config_detail

/// Parses JSON text, reporting syntax errors with line and column.
inline json parse_json_text(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = config_detail::line_col(text, at);
    std::string msg = e.what();
    const auto p = msg.find("parse error");
    if (p != std::string::npos) msg = msg.substr(p);
    throw config_error(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

inline void check_schema_version(const json& j, const std::string& name) {
  if (!j.is_object()) throw config_error(name + ": top level must be a JSON object");
  auto it = j.find("schema_version");
  if (it == j.end()) throw config_error(name + ": missing field 'schema_version'");
  if (!it->is_number_integer() || it->get<int>() != schema_version)
    throw config_error(name + ": unsupported schema_version " + it->dump() + ", expected " +
                       std::to_string(schema_version));
}

inline RunConfig parse_run_config(const json& j, const std::string& path = "",
                                  const AnalysisPolicy& defaults = {}) {
  return config_detail::run(j, path, defaults, false);
}

inline CampaignConfig parse_campaign(const json& j, const std::string& name = "config") {
  using namespace config_detail;
  check_schema_version(j, name);
  known_keys(j, "", {"schema_version", "output_dir", "jobs", "seed", "analysis", "runs"});
  CampaignConfig c;
  AnalysisPolicy defaults;
  optional_field(j, "analysis", "", [&](const json& v, const std::string& q) { defaults = policy(v, q, defaults); });
  optional_field(j, "output_dir", "", [&](const json& v, const std::string& q) { c.output_dir = string(v, q); });
  optional_field(j, "jobs", "", [&](const json& v, const std::string& q) { c.jobs = static_cast<int>(integer(v, q)); });
  optional_field(j, "seed", "", [&](const json& v, const std::string& q) {
    c.seed = seed(v, q);
  });
  if (c.jobs < 1) fail("jobs", "must be at least 1");
  const json& runs = require(j, "runs", "");
  if (!runs.is_array()) fail("runs", "expected a list");
  std::set<std::string> names;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string path = "runs[" + std::to_string(i) + "]";
    RunConfig r = run(runs[i], path, defaults, j.contains("analysis") && j["analysis"].contains("tolerance"));
    if (!names.insert(r.name).second) fail(join(path, "name"), "duplicate run name '" + r.name + "'");
    c.runs.push_back(std::move(r));
  }
  return c;
}

/// Reads and validates a campaign file; snapshot paths resolve relative to it
/// and must exist.
inline CampaignConfig load_campaign(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  CampaignConfig c = parse_campaign(parse_json_text(text, path.string()), path.string());
  c.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  for (auto& r : c.runs)
    for (InitialSource* s : {&r.initial, r.initial_b ? &*r.initial_b : nullptr}) {
      if (!s || !s->file) continue;
      if (s->file->is_relative()) s->file = c.base_dir / *s->file;
      if (!std::filesystem::exists(*s->file))
        throw config_error("run '" + r.name + "': initial data file " + s->file->string() + " does not exist");
    }
  return c;
}

}  // namespace decaylab
