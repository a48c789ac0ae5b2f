#pragma once

#include "stochinv/common.hpp"

namespace stochinv {

/// Hankel functions of the first kind, orders 0 and 1, for z != 0 with Im z >= 0.
/// Ascending series (J, Y) for |z| <= 8, optimally truncated Hankel asymptotic series beyond.
/// Relative accuracy better than 1e-7 throughout the closed upper half-plane.
cplx hankel0(cplx z);
cplx hankel1(cplx z);

/// Ascending-series Bessel functions; accurate for |z| <= 8 (principal branch of log for Y).
cplx bessel_j0_series(cplx z);
cplx bessel_j1_series(cplx z);
cplx bessel_y0_series(cplx z);
cplx bessel_y1_series(cplx z);

/// Hankel asymptotic expansion of H_nu^(1), truncated at the smallest term. Meant for |z| > 8.
cplx hankel_asymptotic(int nu, cplx z);

inline constexpr double kHankelSwitch = 8.0;

}  // namespace stochinv
