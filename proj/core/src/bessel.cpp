#include "stochinv/bessel.hpp"

#include <cmath>
#include <limits>

namespace stochinv {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_domain(cplx z) {
  if (z == cplx(0.0) || z.imag() < 0.0 || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw Error(ErrorCode::DomainError, "Hankel functions need z != 0 and Im z >= 0");
  }
}

}  // namespace

cplx bessel_j0_series(cplx z) {
  const cplx q = -0.25 * z * z;
  cplx term = 1.0;
  cplx sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / static_cast<double>(k * k);
    sum += term;
    if (std::abs(term) < kEps * 1e-3 * std::abs(sum) && k > 4) break;
  }
  return sum;
}

cplx bessel_j1_series(cplx z) {
  const cplx q = -0.25 * z * z;
  cplx term = 0.5 * z;
  cplx sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / static_cast<double>(k * (k + 1));
    sum += term;
    if (std::abs(term) < kEps * 1e-3 * std::abs(sum) && k > 4) break;
  }
  return sum;
}

// Y0 = (2/pi) [ (ln(z/2) + gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k (z^2/4)^k / (k!)^2 ]
cplx bessel_y0_series(cplx z) {
  const cplx q = -0.25 * z * z;
  cplx term = 1.0;  // (-z^2/4)^k / (k!)^2
  cplx tail = 0.0;
  double harmonic = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / static_cast<double>(k * k);
    harmonic += 1.0 / k;
    const cplx add = -harmonic * term;
    tail += add;
    if (std::abs(add) < kEps * 1e-3 * std::abs(tail) && k > 4) break;
  }
  return (2.0 / kPi) * ((std::log(0.5 * z) + kEulerGamma) * bessel_j0_series(z) + tail);
}

// Y1 = (2/pi)(ln(z/2) + gamma) J1 - 2/(pi z)
//      - (1/pi) sum_{k>=0} (-1)^k (H_k + H_{k+1}) (z/2)^{2k+1} / (k! (k+1)!)
cplx bessel_y1_series(cplx z) {
  const cplx q = -0.25 * z * z;
  cplx term = 0.5 * z;  // (-1)^k (z/2)^{2k+1} / (k!(k+1)!)
  double hk = 0.0;
  double hk1 = 1.0;
  cplx sum = (hk + hk1) * term;
  for (int k = 1; k < 200; ++k) {
    term *= q / static_cast<double>(k * (k + 1));
    hk = hk1;
    hk1 += 1.0 / (k + 1);
    const cplx add = (hk + hk1) * term;
    sum += add;
    if (std::abs(add) < kEps * 1e-3 * std::abs(sum) && k > 4) break;
  }
  return (2.0 / kPi) * (std::log(0.5 * z) + kEulerGamma) * bessel_j1_series(z) - 2.0 / (kPi * z) - sum / kPi;
}

// H_nu(z) ~ sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} sum_k i^k a_k(nu) / z^k,
// a_k = prod_{j=1..k} (4nu^2 - (2j-1)^2) / (k! 8^k).
cplx hankel_asymptotic(int nu, cplx z) {
  const double mu = 4.0 * nu * nu;
  const cplx iz = cplx(0.0, 1.0) / z;
  cplx term = 1.0;
  cplx sum = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    const cplx next = term * (mu - odd * odd) / (8.0 * k) * iz;
    const double size = std::abs(next);
    if (size >= last) break;  // asymptotic series starts diverging
    term = next;
    sum += term;
    last = size;
    if (size < kEps * 1e-2 * std::abs(sum)) break;
  }
  const cplx phase = std::exp(cplx(0.0, 1.0) * (z - (0.5 * nu + 0.25) * kPi));
  return std::sqrt(2.0 / (kPi * z)) * phase * sum;
}

cplx hankel0(cplx z) {
  check_domain(z);
  if (std::abs(z) > kHankelSwitch) return hankel_asymptotic(0, z);
  return bessel_j0_series(z) + cplx(0.0, 1.0) * bessel_y0_series(z);
}

cplx hankel1(cplx z) {
  check_domain(z);
  if (std::abs(z) > kHankelSwitch) return hankel_asymptotic(1, z);
  return bessel_j1_series(z) + cplx(0.0, 1.0) * bessel_y1_series(z);
}

}  // namespace stochinv
