#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <memory>
#include <mutex>

#include "thzrel/numerics.hpp"

namespace thzrel::detail {
namespace {

// FFTW's planner is not reentrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<double> linear_convolve_fft(std::span<const double> a, std::span<const double> b,
                                        std::size_t n_out) {
  const std::size_t na = std::min(a.size(), n_out);
  const std::size_t nb = std::min(b.size(), n_out);
  std::vector<double> out(n_out, 0.0);
  if (na == 0 || nb == 0) return out;

  const std::size_t n = next_pow2(na + nb - 1);
  const std::size_t nc = n / 2 + 1;
  FftwBuffer<double> real(fftw_alloc_real(n));
  FftwBuffer<fftw_complex> spec_a(fftw_alloc_complex(nc));
  FftwBuffer<fftw_complex> spec_b(fftw_alloc_complex(nc));

  Plan forward;
  Plan backward;
  {
    std::lock_guard lock(planner_mutex());
    forward.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), spec_a.get(),
                                       FFTW_ESTIMATE));
    backward.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_a.get(), real.get(),
                                        FFTW_ESTIMATE));
  }

  std::fill_n(real.get(), n, 0.0);
  std::copy_n(a.begin(), na, real.get());
  fftw_execute_dft_r2c(forward.get(), real.get(), spec_a.get());
  std::fill_n(real.get(), n, 0.0);
  std::copy_n(b.begin(), nb, real.get());
  fftw_execute_dft_r2c(forward.get(), real.get(), spec_b.get());

  for (std::size_t i = 0; i < nc; ++i) {
    const std::complex<double> x(spec_a[i][0], spec_a[i][1]);
    const std::complex<double> y(spec_b[i][0], spec_b[i][1]);
    const std::complex<double> z = x * y;
    spec_a[i][0] = z.real();
    spec_a[i][1] = z.imag();
  }
  fftw_execute_dft_c2r(backward.get(), spec_a.get(), real.get());

  const double scale = 1.0 / static_cast<double>(n);
  const std::size_t n_valid = std::min(n_out, na + nb - 1);
  for (std::size_t k = 0; k < n_valid; ++k) out[k] = real[k] * scale;
  return out;
}

}  // namespace thzrel::detail
