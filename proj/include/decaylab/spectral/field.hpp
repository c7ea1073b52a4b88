#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "decaylab/error.hpp"
#include "decaylab/spectral/fft.hpp"
#include "decaylab/spectral/grid.hpp"

// Fourier convention
// ------------------
// Coefficients approximate the continuous transform on R^n,
//
//     u_hat(xi) = (L/N)^n * sum_x u(x) exp(-i xi.x),
//     u(x)      = L^-n    * sum_xi u_hat(xi) exp(+i xi.x),
//
// so the only Parseval weight in the library is GridSpec::parseval_weight():
//
//     ||u||^2_{L2(box)} = L^-n * sum_xi |u_hat(xi)|^2.
//
// Every norm and inner product below routes through that constant.

namespace decaylab {

using cplx = std::complex<double>;

namespace detail {
template <class T>
class FieldStorage {
 public:
  FieldStorage() = default;
  FieldStorage(GridSpec grid, int components)
      : grid_(grid), components_(components), data_(grid.size() * components) {
    grid_.validate();
    if (components < 1) throw shape_error("field: component count must be positive");
  }

  const GridSpec& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t points() const { return grid_.size(); }

  std::span<T> component(int c) { return {data_.data() + c * points(), points()}; }
  std::span<const T> component(int c) const {
    return {data_.data() + c * points(), points()};
  }
  T& operator()(int c, std::size_t flat) { return data_[c * points() + flat]; }
  const T& operator()(int c, std::size_t flat) const { return data_[c * points() + flat]; }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool same_shape(const FieldStorage& o) const {
    return grid_ == o.grid_ && components_ == o.components_;
  }

 protected:
  void require_same_shape(const FieldStorage& o, const char* what) const {
    if (!same_shape(o)) throw shape_error(std::string(what) + ": grid or component mismatch");
  }

  GridSpec grid_{};
  int components_ = 0;
  std::vector<T> data_;
};
}  // namespace detail

/// Real values on the collocation lattice, one block per component.
class PhysicalField : public detail::FieldStorage<double> {
 public:
  using FieldStorage::FieldStorage;

  PhysicalField& operator+=(const PhysicalField& o) {
    require_same_shape(o, "PhysicalField +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  /// Samples f(x, component) at the lattice points x_j = j * L / N.
  template <class F>
  static PhysicalField sample(const GridSpec& g, int components, F&& f) {
    PhysicalField p(g, components);
    const double dx = g.dx();
    for (int c = 0; c < components; ++c)
      for (std::size_t flat = 0; flat < g.size(); ++flat) {
        auto idx = g.unflatten(flat);
        std::array<double, 2> x{idx[0] * dx, g.dim > 1 ? idx[1] * dx : 0.0};
        p(c, flat) = f(x, c);
      }
    return p;
  }
};

/// Fourier coefficients of a real field over the full wavenumber lattice.
class SpectralField : public detail::FieldStorage<cplx> {
 public:
  using FieldStorage::FieldStorage;

  SpectralField& operator+=(const SpectralField& o) {
    require_same_shape(o, "SpectralField +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_shape(o, "SpectralField -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o) {
    require_same_shape(o, "SpectralField axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  /// Extracts one component as a scalar field.
  SpectralField slice(int c) const {
    SpectralField out(grid_, 1);
    std::copy_n(component(c).begin(), points(), out.component(0).begin());
    return out;
  }
};

/// Stacks scalar or vector fields on one grid into a single field.
inline SpectralField stack(std::initializer_list<const SpectralField*> parts) {
  int total = 0;
  const GridSpec* g = nullptr;
  for (auto* p : parts) {
    if (g && !(p->grid() == *g)) throw shape_error("stack: grid mismatch");
    g = &p->grid();
    total += p->components();
  }
  if (!g) throw shape_error("stack: no fields");
  SpectralField out(*g, total);
  int c0 = 0;
  for (auto* p : parts)
    for (int c = 0; c < p->components(); ++c, ++c0)
      std::copy_n(p->component(c).begin(), p->points(), out.component(c0).begin());
  return out;
}

inline SpectralField forward_transform(const PhysicalField& p) {
  const GridSpec& g = p.grid();
  SpectralField s(g, p.components());
  const auto& plan = fft::Plan::get(g);
  const double scale = std::pow(g.box_length / g.points_per_axis, g.dim);
  std::vector<cplx> buf(g.size());
  for (int c = 0; c < p.components(); ++c) {
    auto in = p.component(c);
    std::transform(in.begin(), in.end(), buf.begin(), [](double v) { return cplx(v, 0.0); });
    auto out = s.component(c);
    plan.forward(buf.data(), out.data());
    for (auto& v : out) v *= scale;
  }
  return s;
}

inline PhysicalField inverse_transform(const SpectralField& s) {
  const GridSpec& g = s.grid();
  PhysicalField p(g, s.components());
  const auto& plan = fft::Plan::get(g);
  const double scale = g.parseval_weight();
  std::vector<cplx> buf(g.size());
  for (int c = 0; c < s.components(); ++c) {
    plan.backward(s.component(c).data(), buf.data());
    auto out = p.component(c);
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real() * scale;
  }
  return p;
}

/// Work buffers for the batched transforms below.
struct TransformScratch {
  std::vector<cplx> in, out;
};

/// Inverse-transforms `count` contiguous Hermitian spectral blocks of
/// g.size() values into real physical blocks, packing two blocks per FFT.
inline void inverse_blocks(const GridSpec& g, const cplx* spec, double* phys, std::size_t count,
                           TransformScratch& s) {
  const std::size_t n = g.size();
  s.in.resize(n);
  s.out.resize(n);
  const auto& plan = fft::Plan::get(g);
  const double scale = g.parseval_weight();
  for (std::size_t j = 0; j < count; j += 2) {
    const cplx* a = spec + j * n;
    const cplx* b = j + 1 < count ? spec + (j + 1) * n : nullptr;
    for (std::size_t i = 0; i < n; ++i)
      s.in[i] = b ? a[i] + cplx(-b[i].imag(), b[i].real()) : a[i];
    plan.backward(s.in.data(), s.out.data());
    double* pa = phys + j * n;
    for (std::size_t i = 0; i < n; ++i) pa[i] = s.out[i].real() * scale;
    if (b) {
      double* pb = phys + (j + 1) * n;
      for (std::size_t i = 0; i < n; ++i) pb[i] = s.out[i].imag() * scale;
    }
  }
}

/// Forward-transforms `count` contiguous real physical blocks, two per FFT.
inline void forward_blocks(const GridSpec& g, const double* phys, cplx* spec, std::size_t count,
                           TransformScratch& s) {
  const std::size_t n = g.size();
  s.in.resize(n);
  s.out.resize(n);
  const auto& plan = fft::Plan::get(g);
  const double scale = std::pow(g.box_length / g.points_per_axis, g.dim);
  for (std::size_t j = 0; j < count; j += 2) {
    const double* pa = phys + j * n;
    const double* pb = j + 1 < count ? phys + (j + 1) * n : nullptr;
    for (std::size_t i = 0; i < n; ++i) s.in[i] = cplx(pa[i], pb ? pb[i] : 0.0);
    plan.forward(s.in.data(), s.out.data());
    // split by symmetry; the result is exactly Hermitian even for one block
    cplx* a = spec + j * n;
    cplx* b = pb ? spec + (j + 1) * n : nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx z = s.out[i];
      const cplx zm = std::conj(s.out[g.mirror(i)]);
      a[i] = 0.5 * (z + zm) * scale;
      if (b) b[i] = cplx(0.0, -0.5) * (z - zm) * scale;
    }
  }
}

/// D_axis u: multiplies by i*kappa_axis (zero on the Nyquist index).
inline SpectralField derivative(const SpectralField& s, int axis) {
  const GridSpec& g = s.grid();
  if (axis < 0 || axis >= g.dim) throw shape_error("derivative: axis out of range");
  SpectralField out(g, s.components());
  for_each_mode(g, [&](std::size_t flat, const Mode& m) {
    const cplx f(0.0, m.kappa[axis]);
    for (int c = 0; c < s.components(); ++c) out(c, flat) = f * s(c, flat);
  });
  return out;
}

/// ||D^m u||^2 summed over components: w * sum_xi |kappa|^{2m} |u_hat|^2.
///
/// The sum over all m-tuples of partial derivatives collapses to |kappa|^{2m}
/// by the multinomial identity, so this equals the sum of squared L2 norms of
/// every D_{l1}...D_{lm} u computed with derivative().
inline double sobolev_seminorm_sq(const SpectralField& s, int m) {
  if (m < 0) throw config_error("sobolev_seminorm: order must be nonnegative");
  const GridSpec& g = s.grid();
  double acc = 0.0;
  for_each_mode(g, [&](std::size_t flat, const Mode& md) {
    double e = 0.0;
    for (int c = 0; c < s.components(); ++c) e += std::norm(s(c, flat));
    if (e == 0.0) return;
    acc += (m == 0 ? 1.0 : std::pow(md.kappa_sq(), m)) * e;
  });
  return acc * g.parseval_weight();
}

inline double sobolev_seminorm(const SpectralField& s, int m) {
  return std::sqrt(sobolev_seminorm_sq(s, m));
}

/// sum over m-tuples of <D^(m) a, D^(m) b>, i.e. w * sum |kappa|^{2m} Re(conj(a) b).
inline double weighted_inner_product(const SpectralField& a, const SpectralField& b, int m) {
  if (!a.same_shape(b)) throw shape_error("inner_product: grid or component mismatch");
  const GridSpec& g = a.grid();
  double acc = 0.0;
  for_each_mode(g, [&](std::size_t flat, const Mode& md) {
    double e = 0.0;
    for (int c = 0; c < a.components(); ++c)
      e += a(c, flat).real() * b(c, flat).real() + a(c, flat).imag() * b(c, flat).imag();
    if (e == 0.0) return;
    acc += (m == 0 ? 1.0 : std::pow(md.kappa_sq(), m)) * e;
  });
  return acc * g.parseval_weight();
}

/// L2(box) inner product of two real fields, computed spectrally.
inline double inner_product(const SpectralField& a, const SpectralField& b) {
  return weighted_inner_product(a, b, 0);
}

/// Zeroes every mode with |k_axis| > fraction * N/2 on any axis.
inline SpectralField dealias(const SpectralField& s, double fraction) {
  const GridSpec& g = s.grid();
  const double kmax = fraction * 0.5 * g.points_per_axis + 1e-9;
  SpectralField out = s;
  for_each_mode(g, [&](std::size_t flat, const Mode& m) {
    bool drop = false;
    for (int a = 0; a < g.dim; ++a) drop = drop || std::abs(m.k[a]) > kmax;
    if (drop)
      for (int c = 0; c < s.components(); ++c) out(c, flat) = 0.0;
  });
  return out;
}

inline SpectralField dealias(const SpectralField& s) {
  return dealias(s, s.grid().dealias_fraction);
}

/// Collocation quadrature (L/N)^n * sum_x <a(x), b(x)>.
inline double physical_inner_product(const PhysicalField& a, const PhysicalField& b) {
  if (!a.same_shape(b)) throw shape_error("physical_inner_product: shape mismatch");
  const GridSpec& g = a.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) acc += a.values()[i] * b.values()[i];
  return acc * std::pow(g.dx(), g.dim);
}

inline double physical_l2_norm(const PhysicalField& p) {
  return std::sqrt(physical_inner_product(p, p));
}

inline double max_abs(const PhysicalField& p) {
  double m = 0.0;
  for (double v : p.values()) m = std::max(m, std::abs(v));
  return m;
}

/// max_xi |u_hat(-xi) - conj(u_hat(xi))| relative to max |u_hat|.
inline double hermitian_defect(const SpectralField& s) {
  const GridSpec& g = s.grid();
  double scale = 0.0, defect = 0.0;
  for (int c = 0; c < s.components(); ++c)
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      scale = std::max(scale, std::abs(s(c, flat)));
      defect = std::max(defect, std::abs(s(c, g.mirror(flat)) - std::conj(s(c, flat))));
    }
  return scale > 0.0 ? defect / scale : 0.0;
}

/// max_xi |kappa . u_hat| / (|kappa| |u_hat|) over modes carrying energy above
/// 1e-28 of the peak mode; zero for fields without such modes.
inline double divergence_residual(const SpectralField& s) {
  const GridSpec& g = s.grid();
  if (s.components() != g.dim) throw shape_error("divergence_residual: vector field required");
  double peak = 0.0;
  for_each_mode(g, [&](std::size_t flat, const Mode&) {
    double e = 0.0;
    for (int c = 0; c < g.dim; ++c) e += std::norm(s(c, flat));
    peak = std::max(peak, e);
  });
  double worst = 0.0;
  for_each_mode(g, [&](std::size_t flat, const Mode& m) {
    const double k2 = m.kappa_sq();
    if (k2 == 0.0) return;
    double e = 0.0;
    cplx dot = 0.0;
    for (int c = 0; c < g.dim; ++c) {
      e += std::norm(s(c, flat));
      dot += m.kappa[c] * s(c, flat);
    }
    if (e <= 1e-28 * peak || e == 0.0) return;
    worst = std::max(worst, std::abs(dot) / std::sqrt(k2 * e));
  });
  return worst;
}

}  // namespace decaylab
