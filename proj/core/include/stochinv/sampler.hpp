#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stochinv/params.hpp"

namespace stochinv {

/// One grid sample of a GMIG source. Scalar sources have one component, vector sources d.
/// Values are stored component-major: component c occupies [c * grid.size(), (c+1) * grid.size()).
struct FieldRealization {
  SpatialGrid grid;
  int components = 1;
  std::vector<double> values;
  std::uint64_t seed = 0;
  double m = 0.0;

  std::span<const double> component(int c) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(c) * grid.size(), grid.size());
  }
  std::span<double> component(int c) {
    return std::span<double>(values).subspan(static_cast<std::size_t>(c) * grid.size(), grid.size());
  }

  static FieldRealization zeros(const SpatialGrid& grid, int components, double m = 0.0) {
    return {grid, components, std::vector<double>(grid.size() * static_cast<std::size_t>(components), 0.0), 0, m};
  }
};

/// Stationary centered Gaussian field on the periodic box with spectral density |xi|^{-m}
/// (zero mode removed). Component `stream` selects an independent copy.
///
/// Construction: real white noise W with unit variance per node, keyed by
/// (seed, stream, node), is transformed, weighted by |xi|^{-m/2} h^{-d/2}, and transformed
/// back with 1/N^d. The resulting trigonometric field has
///   E[f(x) f(y)] = L^{-d} sum_{xi != 0} |xi|^{-m} e^{i xi.(x-y)},
/// the box Riemann sum of (2 pi)^{-d} int |xi|^{-m} e^{i xi.(x-y)} dxi.
std::vector<double> stationary_field(const SpatialGrid& grid, double m, std::uint64_t seed, int stream = 0);

/// f = sqrt(sigma) * stationary_field. Principal covariance symbol sigma(x)|xi|^{-m}.
FieldRealization sample_scalar(const CheckedSource& source, std::uint64_t seed);

/// f = Sigma^{1/2}(x) * (d independent stationary fields), with the symmetric PSD square root.
FieldRealization sample_vector(const CheckedSource& source, std::uint64_t seed);

/// Dispatches on the model of `source`.
FieldRealization sample(const CheckedSource& source, std::uint64_t seed);

/// Spectral projection onto discretely divergence-free fields: applies I - xi xi^T/|xi|^2
/// to every nonzero mode (Nyquist components of xi count as 0). Requires a 3-component
/// realization on a 3D grid.
FieldRealization leray_project(const FieldRealization& f);

/// Symmetric PSD square root of the leading d x d block; eigenvalues below zero are clamped.
RMat3 psd_sqrt(const RMat3& a, int d);

}  // namespace stochinv
