#pragma once

#include <span>
#include <utility>
#include <vector>

#include "stochinv/params.hpp"
#include "stochinv/sampler.hpp"

namespace stochinv {

enum class Channel { Scalar, Electric, Compressional, Shear };

std::string_view to_string(Channel c) noexcept;

/// Far-field value at one direction. Scalar channels use value[0] only.
struct FarFieldSample {
  Vec3 direction = Vec3::Zero();
  CVec3 value = CVec3::Zero();
  double k = 0.0;
  Channel channel = Channel::Scalar;
  int dim = 2;

  cplx scalar() const { return value[0]; }
};

struct ElasticWavenumbers {
  double k;
  double c_p;
  double c_s;
  double k_p;
  double k_s;

  ElasticWavenumbers(double k, const LameParameters& lame);
};

/// Trapezoidal sum h^d sum_nodes e^{-i w.y} v(y), by direct summation with separable
/// per-axis exponentials.
cplx fourier_at(const SpatialGrid& grid, std::span<const double> values, const Vec3& w);

/// Componentwise transform of a realization; unused components are zero.
CVec3 fourier_at(const FieldRealization& f, const Vec3& w);

/// Quadrature transform of a strength field: scalar, or the full d x d matrix.
cplx strength_transform(const StrengthField& sigma, const Vec3& gamma);
CMat3 strength_matrix_transform(const StrengthField& sigma, const Vec3& gamma);

/// u_inf(xhat) = -(beta_d/n) k^{(d+1-4n)/2} fhat(k xhat), with fhat(w) = int e^{-i w.y} f(y) dy.
std::vector<FarFieldSample> poly_farfield(const FieldRealization& f, double k, int n, std::span<const Vec3> dirs);

/// E_inf(xhat) = i k beta_3 fhat(k xhat).
std::vector<FarFieldSample> em_farfield(const FieldRealization& f, double k, std::span<const Vec3> dirs);

/// Compressional and shear patterns:
///   u_p = -beta_d c_p^{(d+2)/2} k^{(d-3)/2} xhat xhat^T fhat(k_p xhat)
///   u_s = -beta_d c_s^{(d+2)/2} k^{(d-3)/2} (I - xhat xhat^T) fhat(k_s xhat)
std::vector<std::pair<FarFieldSample, FarFieldSample>> elastic_farfield(const FieldRealization& f, double k,
                                                                        const LameParameters& lame,
                                                                        std::span<const Vec3> dirs);

/// Default direction sets: uniform angles (d = 2) or a Fibonacci sphere lattice (d = 3).
std::vector<Vec3> direction_set(int d, int count);

}  // namespace stochinv
