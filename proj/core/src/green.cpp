#include "stochinv/green.hpp"

#include <cmath>

#include "stochinv/bessel.hpp"
#include "stochinv/farfield.hpp"

namespace stochinv {

SplitWavenumbers::SplitWavenumbers(double k_, int n_) : k(k_), n(n_) {
  if (!(k > 0.0)) throw Error(ErrorCode::DomainError, "wavenumber must be positive");
  if (n < 1) throw Error(ErrorCode::InvalidModel, "polyharmonic order must be >= 1");
  kappa.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) kappa.push_back(std::polar(k, kPi * j / n));
}

cplx SplitWavenumbers::partial_fraction(double t) const {
  cplx sum = 0.0;
  for (const auto& kj : kappa) sum += kj * kj / (t - kj * kj);
  return sum / (n * std::pow(k, 2 * n));
}

cplx helmholtz_green(const Vec3& x, const Vec3& y, cplx kappa, int d) {
  const double r = (x - y).norm();
  if (r == 0.0) throw Error(ErrorCode::CoincidentPoints, "Green's function is singular at x = y");
  if (d == 2) return cplx(0.0, 0.25) * hankel0(kappa * r);
  if (d == 3) return std::exp(cplx(0.0, 1.0) * kappa * r) / (4.0 * kPi * r);
  throw Error(ErrorCode::DimensionMismatch, "dimension must be 2 or 3");
}

cplx polyharmonic_green(const Vec3& x, const Vec3& y, const SplitWavenumbers& split, int d) {
  cplx sum = 0.0;
  for (const auto& kj : split.kappa) sum += kj * kj * helmholtz_green(x, y, kj, d);
  return sum / (split.n * std::pow(split.k, 2 * split.n));
}

cplx polyharmonic_green(const Vec3& x, const Vec3& y, double k, int n, int d) {
  return polyharmonic_green(x, y, SplitWavenumbers(k, n), d);
}

std::vector<cplx> near_field(const FieldRealization& f, std::span<const Vec3> targets, double k, int n) {
  if (f.components != 1) throw Error(ErrorCode::DimensionMismatch, "near field needs a scalar realization");
  const auto& grid = f.grid;
  const int d = grid.dim();
  const double half = 0.5 * grid.box_length();
  for (const auto& t : targets) {
    if (t.head(d).cwiseAbs().maxCoeff() <= half) {
      throw Error(ErrorCode::TargetInsideSupport, "near-field target lies inside the grid box");
    }
  }
  const SplitWavenumbers split(k, n);
  const double w = grid.cell_volume();
  std::vector<cplx> u(targets.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double fi = f.values[i];
    if (fi == 0.0) continue;
    const Vec3 y = grid.node(i);
    for (std::size_t t = 0; t < targets.size(); ++t) u[t] -= w * fi * polyharmonic_green(targets[t], y, split, d);
  }
  return u;
}

std::vector<double> asymptote_residual(const FieldRealization& f, double k, int n, const Vec3& xhat,
                                       std::span<const double> radii) {
  const int d = f.grid.dim();
  std::vector<Vec3> targets;
  for (double r : radii) {
    if (!(r >= 10.0)) throw Error(ErrorCode::DomainError, "asymptote radii must be >= 10");
    targets.push_back(r * xhat);
  }
  const auto u = near_field(f, targets, k, n);
  const Vec3 dirs[1] = {xhat};
  const cplx uinf = poly_farfield(f, k, n, dirs).front().scalar();
  std::vector<double> out;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    const cplx scaled = std::pow(r, 0.5 * (d - 1)) * std::exp(cplx(0.0, -k * r)) * u[i];
    out.push_back(std::abs(scaled - uinf));
  }
  return out;
}

}  // namespace stochinv
