#pragma once

#include <span>
#include <vector>

#include "stochinv/common.hpp"
#include "stochinv/sampler.hpp"

namespace stochinv {

/// kappa_j = k exp(i pi j / n), j = 0..n-1: the Helmholtz wavenumbers of the partial-fraction
/// split of ((-Delta)^n - k^{2n})^{-1}.
struct SplitWavenumbers {
  double k;
  int n;
  std::vector<cplx> kappa;

  SplitWavenumbers(double k, int n);

  /// (1/(n k^{2n})) sum_j kappa_j^2 / (t - kappa_j^2), with t = |xi|^2.
  cplx partial_fraction(double t) const;
};

/// Outgoing fundamental solution of Delta + kappa^2: (i/4) H0(kappa r) in 2D, e^{i kappa r}/(4 pi r) in 3D.
cplx helmholtz_green(const Vec3& x, const Vec3& y, cplx kappa, int d);

/// (1/(n k^{2n})) sum_j kappa_j^2 Phi_d(x, y, kappa_j).
cplx polyharmonic_green(const Vec3& x, const Vec3& y, double k, int n, int d);
cplx polyharmonic_green(const Vec3& x, const Vec3& y, const SplitWavenumbers& split, int d);

/// u(x) = -int G(x, y) f(y) dy over the nonzero nodes of a scalar realization.
/// Targets must lie outside the closed grid box.
std::vector<cplx> near_field(const FieldRealization& f, std::span<const Vec3> targets, double k, int n);

/// |R^{(d-1)/2} e^{-ikR} u(R xhat) - u_inf(xhat)| for each radius R >= 10.
std::vector<double> asymptote_residual(const FieldRealization& f, double k, int n, const Vec3& xhat,
                                       std::span<const double> radii);

}  // namespace stochinv
