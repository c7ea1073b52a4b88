#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "decaylab/heat_oracle.hpp"
#include "decaylab/models/run.hpp"

// CSV layout of a run record (header row mandatory):
//
//   t, D0u..D<m>u, [D0b..D<m>b], g0..g<m-1>, D0f..D<m>f,
//   orth0, energy_residual, div_residual, dt
//
// Oracle curves:  t, D0u_sq, D1u_sq, ..., D<m>u_sq
//
// Numbers are written with 17 significant digits so files round-trip
// exactly; flagged ratio samples are written as "nan".

namespace decaylab::io {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) {
    while (!cur.empty() && (cur.back() == '\r' || cur.back() == ' ')) cur.pop_back();
    while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
    out.push_back(cur);
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw config_error(where + ": cannot parse number '" + s + "'");
  return v;
}

inline std::vector<std::string> record_header(const RunRecord& rec) {
  std::vector<std::string> h{"t"};
  for (int m = 0; m <= rec.m_max; ++m) h.push_back("D" + std::to_string(m) + "u");
  if (rec.has_b)
    for (int m = 0; m <= rec.m_max; ++m) h.push_back("D" + std::to_string(m) + "b");
  for (int m = 0; m < rec.m_max; ++m) h.push_back("g" + std::to_string(m));
  for (int m = 0; m <= rec.m_max; ++m) h.push_back("D" + std::to_string(m) + "f");
  for (const char* c : {"orth0", "energy_residual", "div_residual", "dt"}) h.push_back(c);
  return h;
}

inline void write_record_csv(std::ostream& os, const RunRecord& rec) {
  const auto h = record_header(rec);
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << "\n";
  for (const auto& s : rec.samples) {
    std::vector<double> row{s.t};
    row.insert(row.end(), s.du.begin(), s.du.end());
    if (rec.has_b) row.insert(row.end(), s.db.begin(), s.db.end());
    row.insert(row.end(), s.g.begin(), s.g.end());
    row.insert(row.end(), s.df.begin(), s.df.end());
    for (double v : {s.orth0, s.energy_residual, s.div_residual, s.dt}) row.push_back(v);
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
}

/// Reads samples into `rec`; m_max and has_b are inferred from the header.
inline void read_record_csv(std::istream& is, RunRecord& rec, const std::string& name = "record.csv") {
  std::string line;
  if (!std::getline(is, line)) throw config_error(name + ": empty file");
  const auto header = split(line);
  int nu = 0, nb = 0;
  for (const auto& c : header) {
    if (c.size() >= 3 && c[0] == 'D' && c.back() == 'u') ++nu;
    if (c.size() >= 3 && c[0] == 'D' && c.back() == 'b') ++nb;
  }
  if (header.empty() || header[0] != "t" || nu < 2)
    throw config_error(name + ": header does not look like a run record");
  rec.m_max = nu - 1;
  rec.has_b = nb > 0;
  const auto expect = record_header(rec);
  if (header != expect)
    throw config_error(name + ": unexpected column layout, expected " + std::to_string(expect.size()) +
                       " columns starting t,D0u");
  rec.samples.clear();
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = name + ":" + std::to_string(lineno);
    if (cells.size() != header.size())
      throw config_error(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                         std::to_string(cells.size()));
    std::size_t k = 0;
    auto next = [&] { return parse_double(cells[k++], where); };
    RunSample s;
    s.t = next();
    for (int m = 0; m <= rec.m_max; ++m) s.du.push_back(next());
    if (rec.has_b)
      for (int m = 0; m <= rec.m_max; ++m) s.db.push_back(next());
    for (int m = 0; m < rec.m_max; ++m) s.g.push_back(next());
    for (int m = 0; m <= rec.m_max; ++m) s.df.push_back(next());
    s.orth0 = next();
    s.energy_residual = next();
    s.div_residual = next();
    s.dt = next();
    if (!rec.samples.empty() && !(s.t > rec.samples.back().t))
      throw config_error(where + ": times must be strictly increasing");
    rec.samples.push_back(std::move(s));
  }
}

inline void write_oracle_csv(std::ostream& os, const std::vector<OracleCurve>& curves) {
  if (curves.empty()) throw config_error("oracle csv: no curves");
  os << "t";
  for (const auto& c : curves) os << ",D" << c.order << "u_sq";
  os << "\n";
  for (std::size_t i = 0; i < curves[0].times.size(); ++i) {
    os << format_double(curves[0].times[i]);
    for (const auto& c : curves) os << "," << format_double(c.values.at(i));
    os << "\n";
  }
}

inline std::vector<OracleCurve> read_oracle_csv(std::istream& is, double nu,
                                                const std::string& name = "oracle.csv") {
  std::string line;
  if (!std::getline(is, line)) throw config_error(name + ": empty file");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t") throw config_error(name + ": header must start with t");
  std::vector<OracleCurve> curves(header.size() - 1);
  for (std::size_t j = 1; j < header.size(); ++j) {
    const auto& h = header[j];
    if (h.size() < 6 || h[0] != 'D' || h.substr(h.size() - 4) != "u_sq")
      throw config_error(name + ": unexpected column '" + h + "'");
    curves[j - 1].order = std::stoi(h.substr(1, h.size() - 5));
    curves[j - 1].viscosity = nu;
  }
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = name + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) throw config_error(where + ": column count mismatch");
    const double t = parse_double(cells[0], where);
    if (!curves[0].times.empty() && !(t > curves[0].times.back()))
      throw config_error(where + ": times must be strictly increasing");
    for (std::size_t j = 1; j < cells.size(); ++j) {
      curves[j - 1].times.push_back(t);
      curves[j - 1].values.push_back(parse_double(cells[j], where));
    }
  }
  return curves;
}

inline bool is_oracle_csv(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line.find("u_sq") != std::string::npos;
}

/// Writes via a temporary sibling and renames, so readers never observe a
/// half-written file.
inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw config_error("cannot write " + tmp);
    f << content;
    if (!f) throw config_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace decaylab::io
