#pragma once

// Independent reference implementations used only by the tests.

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <cmath>
#include <array>
#include <complex>
#include <vector>

#include "stochinv/common.hpp"
#include "stochinv/params.hpp"

namespace oracle {

using mp_complex = boost::multiprecision::cpp_complex<120>;
using mp_real = mp_complex::value_type;

/// H0^(1)(z) = J0 + i Y0 from the ascending series at 120 digits. Good for |z| up to ~80
/// (the series cancellation loses about |z|/2.3 digits).
inline std::complex<double> hankel0(std::complex<double> zd) {
  const mp_complex z(mp_real(zd.real()), mp_real(zd.imag()));
  const mp_complex q = -(z * z) / mp_real(4);
  mp_complex term(mp_real(1));
  mp_complex j0 = term;
  mp_complex tail(mp_real(0));  // sum_{k>=1} H_k (-z^2/4)^k / (k!)^2, sign folded below
  mp_real harmonic(0);
  const mp_real eps("1e-118");
  for (int k = 1; k < 2000; ++k) {
    term *= q / mp_real(static_cast<double>(k) * k);
    harmonic += mp_real(1) / k;
    j0 += term;
    tail += harmonic * term;
    if (abs(term) * harmonic < eps * (abs(j0) + mp_real(1)) && k > 4) break;
  }
  const mp_real pi = boost::math::constants::pi<mp_real>();
  const mp_real gamma = boost::math::constants::euler<mp_real>();
  // Y0 = (2/pi)[(ln(z/2) + gamma) J0 - sum_{k>=1} H_k (-z^2/4)^k/(k!)^2]
  const mp_complex y0 = (mp_real(2) / pi) * ((log(z / mp_real(2)) + gamma) * j0 - tail);
  const mp_complex h = j0 + mp_complex(mp_real(0), mp_real(1)) * y0;
  return {static_cast<double>(h.real()), static_cast<double>(h.imag())};
}

/// Independent 2D/3D Gaussian bump transform: amplitude (2 pi a^2)^{d/2} e^{-a^2|g|^2/2} e^{-i g.c}.
inline std::complex<double> gaussian_hat(const stochinv::Vec3& g, const stochinv::Vec3& c, double a, double amp,
                                         int d) {
  const double two_pi = 2.0 * std::acos(-1.0);
  return amp * std::pow(two_pi * a * a, 0.5 * d) * std::exp(-0.5 * a * a * g.squaredNorm()) *
         std::exp(std::complex<double>(0.0, -g.dot(c)));
}

/// Plain O(N^d) nested-loop quadrature of int e^{-i g.x} v(x) dx, written without any of the
/// library's separable tables.
inline std::complex<double> grid_transform(const stochinv::SpatialGrid& grid, const std::vector<double>& v,
                                           const stochinv::Vec3& g) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (v[i] == 0.0) continue;
    const stochinv::Vec3 x = grid.node(i);
    acc += v[i] * std::exp(std::complex<double>(0.0, -g.dot(x)));
  }
  return acc * grid.cell_volume();
}

/// Periodic, zero-mode-free covariance kernel of the stationary base field,
///   K_L(z) = L^{-d} sum_{xi != 0} |xi|^{-m} cos(xi.z),  xi = (2 pi / L) j,  j in [-N/2, N/2)^d,
/// tabulated on node differences by direct mode summation.
class PeriodicKernel {
 public:
  PeriodicKernel(const stochinv::SpatialGrid& grid, double m) : d_(grid.dim()), n_(grid.points_per_axis()) {
    const double dxi = 2.0 * std::acos(-1.0) / grid.box_length();
    const double h = grid.spacing();
    const std::size_t count = grid.size();
    table_.assign(count, 0.0);
    std::vector<std::array<int, 3>> modes;
    for (std::size_t q = 0; q < count; ++q) {
      auto j = grid.unravel(q);
      for (int a = 0; a < d_; ++a) j[a] -= n_ / 2;
      if (j[0] == 0 && j[1] == 0 && j[2] == 0) continue;
      modes.push_back(j);
    }
    for (std::size_t p = 0; p < count; ++p) {
      const auto delta = grid.unravel(p);
      double acc = 0.0;
      for (const auto& j : modes) {
        double xi2 = 0.0;
        double phase = 0.0;
        for (int a = 0; a < d_; ++a) {
          xi2 += (j[a] * dxi) * (j[a] * dxi);
          phase += j[a] * dxi * delta[a] * h;
        }
        acc += std::pow(xi2, -0.5 * m) * std::cos(phase);
      }
      table_[p] = acc / std::pow(grid.box_length(), d_);
    }
  }

  /// K_L(x_a - x_b) for node multi-indices a, b.
  double operator()(const std::array<int, 3>& a, const std::array<int, 3>& b) const {
    std::size_t idx = 0;
    for (int axis = 0; axis < d_; ++axis) idx = idx * n_ + static_cast<std::size_t>(((a[axis] - b[axis]) % n_ + n_) % n_);
    return table_[idx];
  }

 private:
  int d_;
  int n_;
  std::vector<double> table_;
};

/// Cov(<f_i, phi>, <f_j, psi>) for f = S(x) (independent stationary components), S = sqrt(sigma):
///   h^{2d} sum_x sum_y phi(x) psi(y) [S(x) S(y)]_{ij} K_L(x - y).
/// Scalar fields pass S as 1x1 values via `root_ij(x, y)`.
template <class RootProduct>
double bilinear_variance(const stochinv::SpatialGrid& grid, const PeriodicKernel& kernel, const std::vector<double>& phi,
                         const std::vector<double>& psi, RootProduct&& root_ij) {
  std::vector<std::size_t> sx, sy;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (phi[i] != 0.0) sx.push_back(i);
    if (psi[i] != 0.0) sy.push_back(i);
  }
  double acc = 0.0;
  for (std::size_t a : sx) {
    const auto ia = grid.unravel(a);
    for (std::size_t b : sy) {
      const double r = root_ij(a, b);
      if (r == 0.0) continue;
      acc += phi[a] * psi[b] * r * kernel(ia, grid.unravel(b));
    }
  }
  const double cell = grid.cell_volume();
  return acc * cell * cell;
}

}  // namespace oracle
