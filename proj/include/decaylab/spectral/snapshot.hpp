#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "decaylab/spectral/field.hpp"

// Field snapshot, version 1. All values little-endian.
//
//   offset  size  content
//        0     8  magic "DLSNAP\0\0"
//        8     4  uint32 format version (1)
//       12     4  int32  dim
//       16     4  int32  points_per_axis N
//       20     4  int32  components c
//       24     8  float64 box_length L
//       32     8  float64 dealias_fraction
//       40     -  c * N^dim pairs (float64 re, float64 im): component-major,
//                 then lattice storage order (axis 0 slowest, FFT ordering)
//
// Coefficients use the convention documented in spectral/field.hpp.

namespace decaylab::snapshot {

inline constexpr std::array<char, 8> magic = {'D', 'L', 'S', 'N', 'A', 'P', '\0', '\0'};
inline constexpr std::uint32_t format_version = 1;

static_assert(std::endian::native == std::endian::little,
              "snapshot I/O assumes a little-endian host");

namespace detail {
template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw config_error("snapshot " + path + ": truncated file");
  return v;
}
}  // namespace detail

inline void write(const std::string& path, const SpectralField& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw config_error("snapshot: cannot open " + path + " for writing");
  const GridSpec& g = s.grid();
  os.write(magic.data(), magic.size());
  detail::put<std::uint32_t>(os, format_version);
  detail::put<std::int32_t>(os, g.dim);
  detail::put<std::int32_t>(os, g.points_per_axis);
  detail::put<std::int32_t>(os, s.components());
  detail::put<double>(os, g.box_length);
  detail::put<double>(os, g.dealias_fraction);
  for (const cplx& v : s.values()) {
    detail::put<double>(os, v.real());
    detail::put<double>(os, v.imag());
  }
  if (!os) throw config_error("snapshot: write failed for " + path);
}

inline SpectralField read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw config_error("snapshot: cannot open " + path);
  std::array<char, 8> m{};
  if (!is.read(m.data(), m.size()) || m != magic)
    throw config_error("snapshot " + path + ": bad magic");
  const auto version = detail::get<std::uint32_t>(is, path);
  if (version != format_version)
    throw config_error("snapshot " + path + ": unsupported version " + std::to_string(version));
  GridSpec g;
  g.dim = detail::get<std::int32_t>(is, path);
  g.points_per_axis = detail::get<std::int32_t>(is, path);
  const int comps = detail::get<std::int32_t>(is, path);
  g.box_length = detail::get<double>(is, path);
  g.dealias_fraction = detail::get<double>(is, path);
  g.validate();
  if (comps < 1 || comps > 2) throw config_error("snapshot " + path + ": bad component count");
  SpectralField s(g, comps);
  for (cplx& v : s.values()) {
    const double re = detail::get<double>(is, path);
    const double im = detail::get<double>(is, path);
    v = {re, im};
  }
  return s;
}

}  // namespace decaylab::snapshot
