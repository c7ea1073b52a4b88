#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "decaylab/spectral/grid.hpp"

namespace decaylab::fft {

using cplx = std::complex<double>;

/// Unnormalized complex DFT of one grid shape, planned once per process.
///
/// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so that results are
/// reproducible and the plan may be executed on any pair of distinct buffers.
/// Planning is serialized; execution through fftw_execute_dft is thread safe.
class Plan {
 public:
  static const Plan& get(int dim, int n) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{dim, n}];
    if (!slot) slot.reset(new Plan(dim, n));
    return *slot;
  }

  static const Plan& get(const GridSpec& g) { return get(g.dim, g.points_per_axis); }

  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  /// out[k] = sum_x in[x] exp(-i k x)
  void forward(const cplx* in, cplx* out) const { exec(forward_, in, out); }
  /// out[x] = sum_k in[k] exp(+i k x)
  void backward(const cplx* in, cplx* out) const { exec(backward_, in, out); }

 private:
  Plan(int dim, int n) {
    int dims[2] = {n, n};
    std::size_t total = dim == 1 ? n : static_cast<std::size_t>(n) * n;
    auto* a = fftw_alloc_complex(total);
    auto* b = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft(dim, dims, a, b, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft(dim, dims, a, b, FFTW_BACKWARD, flags);
    fftw_free(a);
    fftw_free(b);
  }

  static void exec(fftw_plan p, const cplx* in, cplx* out) {
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace decaylab::fft
