#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace stochinv::detail {

namespace {

// FFTW's planner is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(int d, int n) : d_(d), n_(n) {
  real_size_ = 1;
  for (int i = 0; i < d - 1; ++i) real_size_ *= static_cast<std::size_t>(n);
  spectrum_size_ = real_size_ * static_cast<std::size_t>(n / 2 + 1);
  real_size_ *= static_cast<std::size_t>(n);

  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(real_size_);
  spectrum_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(spectrum_size_));
  auto* out = reinterpret_cast<fftw_complex*>(spectrum_);
  const int dims[3] = {n, n, n};
  plan_forward_ = fftw_plan_dft_r2c(d, dims, real_, out, FFTW_ESTIMATE);
  plan_backward_ = fftw_plan_dft_c2r(d, dims, out, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft::forward() { fftw_execute(static_cast<fftw_plan>(plan_forward_)); }

void RealFft::backward() { fftw_execute(static_cast<fftw_plan>(plan_backward_)); }

std::array<int, 3> RealFft::mode(std::size_t index) const noexcept {
  std::array<int, 3> j{0, 0, 0};
  const auto half = static_cast<std::size_t>(n_ / 2 + 1);
  j[d_ - 1] = static_cast<int>(index % half);
  index /= half;
  for (int axis = d_ - 2; axis >= 0; --axis) {
    j[axis] = static_cast<int>(index % static_cast<std::size_t>(n_));
    index /= static_cast<std::size_t>(n_);
  }
  for (int axis = 0; axis < d_; ++axis) {
    if (j[axis] >= n_ / 2) j[axis] -= n_;
  }
  return j;
}

RealFft& thread_fft(int d, int n) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[{d, n}];
  if (!slot) slot = std::make_unique<RealFft>(d, n);
  return *slot;
}

}  // namespace stochinv::detail
