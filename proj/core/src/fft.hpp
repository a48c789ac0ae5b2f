#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>

namespace stochinv::detail {

/// In-place-style real <-> half-complex FFT on an N^d box backed by FFTW.
/// Transforms are unnormalized; backward(forward(x)) = N^d x.
class RealFft {
 public:
  RealFft(int d, int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int dim() const noexcept { return d_; }
  int points_per_axis() const noexcept { return n_; }

  std::span<double> real() noexcept { return {real_, real_size_}; }
  std::span<std::complex<double>> spectrum() noexcept { return {spectrum_, spectrum_size_}; }

  void forward();
  void backward();

  /// Signed wave indices (j_0, .., j_{d-1}) of a half-spectrum entry; j in [-N/2, N/2).
  std::array<int, 3> mode(std::size_t index) const noexcept;

 private:
  int d_;
  int n_;
  std::size_t real_size_;
  std::size_t spectrum_size_;
  double* real_;
  std::complex<double>* spectrum_;
  void* plan_forward_;
  void* plan_backward_;
};

/// Per-thread plan cache keyed by (d, N).
RealFft& thread_fft(int d, int n);

}  // namespace stochinv::detail
