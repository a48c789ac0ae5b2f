#include "stochinv/sampler.hpp"

#include <cmath>

#include "fft.hpp"
#include "stochinv/rng.hpp"

namespace stochinv {

namespace {

double wave_number_squared(const detail::RealFft& fft, std::size_t k, double dxi) {
  const auto j = fft.mode(k);
  double s = 0.0;
  for (int axis = 0; axis < fft.dim(); ++axis) s += (j[axis] * dxi) * (j[axis] * dxi);
  return s;
}

}  // namespace

std::vector<double> stationary_field(const SpatialGrid& grid, double m, std::uint64_t seed, int stream) {
  auto& fft = detail::thread_fft(grid.dim(), grid.points_per_axis());
  const CounterRng rng(seed);
  auto real = fft.real();
  for (std::size_t i = 0; i < real.size(); ++i) real[i] = rng.normal(static_cast<std::uint64_t>(stream), i);

  fft.forward();
  const double dxi = 2.0 * kPi / grid.box_length();
  const double cell = std::pow(grid.spacing(), -0.5 * grid.dim());
  const double norm = 1.0 / static_cast<double>(grid.size());
  auto spec = fft.spectrum();
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double xi2 = wave_number_squared(fft, k, dxi);
    spec[k] *= xi2 > 0.0 ? std::pow(xi2, -0.25 * m) * cell * norm : 0.0;
  }
  fft.backward();
  return {real.begin(), real.end()};
}

FieldRealization sample_scalar(const CheckedSource& source, std::uint64_t seed) {
  const auto& strength = source.strength();
  if (strength.is_matrix()) throw Error(ErrorCode::DimensionMismatch, "sample_scalar needs a scalar strength");
  const auto& grid = strength.grid();
  auto out = FieldRealization::zeros(grid, 1, source.spec().m);
  out.seed = seed;
  const auto sigma = strength.scalar_values();
  const auto base = stationary_field(grid, source.spec().m, seed, 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.values[i] = sigma[i] > 0.0 ? std::sqrt(sigma[i]) * base[i] : 0.0;
  }
  return out;
}

RMat3 psd_sqrt(const RMat3& a, int d) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.topLeftCorner(d, d));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  RMat3 out = RMat3::Zero();
  out.topLeftCorner(d, d) = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

FieldRealization sample_vector(const CheckedSource& source, std::uint64_t seed) {
  const auto& strength = source.strength();
  if (!strength.is_matrix()) throw Error(ErrorCode::DimensionMismatch, "sample_vector needs a matrix strength");
  const auto& grid = strength.grid();
  const int d = grid.dim();
  auto out = FieldRealization::zeros(grid, d, source.spec().m);
  out.seed = seed;

  std::vector<std::vector<double>> base;
  base.reserve(static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) base.push_back(stationary_field(grid, source.spec().m, seed, c));

  const auto sigma = strength.matrix_values();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (sigma[i].isZero(0.0)) continue;
    const RMat3 root = psd_sqrt(sigma[i], d);
    for (int r = 0; r < d; ++r) {
      double acc = 0.0;
      for (int c = 0; c < d; ++c) acc += root(r, c) * base[static_cast<std::size_t>(c)][i];
      out.component(r)[i] = acc;
    }
  }
  return out;
}

FieldRealization sample(const CheckedSource& source, std::uint64_t seed) {
  return source.model().vector_valued() ? sample_vector(source, seed) : sample_scalar(source, seed);
}

FieldRealization leray_project(const FieldRealization& f) {
  const int d = f.grid.dim();
  if (d != 3 || f.components != 3) {
    throw Error(ErrorCode::DimensionMismatch, "Leray projection needs a 3-component field on a 3D grid");
  }
  auto& fft = detail::thread_fft(d, f.grid.points_per_axis());
  const std::size_t n_spec = fft.spectrum().size();
  std::vector<std::vector<cplx>> hat(3, std::vector<cplx>(n_spec));
  for (int c = 0; c < 3; ++c) {
    const auto comp = f.component(c);
    std::copy(comp.begin(), comp.end(), fft.real().begin());
    fft.forward();
    std::copy(fft.spectrum().begin(), fft.spectrum().end(), hat[static_cast<std::size_t>(c)].begin());
  }

  const double dxi = 2.0 * kPi / f.grid.box_length();
  for (std::size_t k = 0; k < n_spec; ++k) {
    // Nyquist components carry no sign; like spectral differentiation, treat them as 0 so the
    // projector stays consistent across Hermitian pairs (and exactly idempotent after c2r).
    auto j = fft.mode(k);
    const int nyquist = -f.grid.points_per_axis() / 2;
    for (auto& c : j) c = c == nyquist ? 0 : c;
    const Vec3 xi(j[0] * dxi, j[1] * dxi, j[2] * dxi);
    const double xi2 = xi.squaredNorm();
    if (xi2 == 0.0) continue;
    const cplx div = (xi[0] * hat[0][k] + xi[1] * hat[1][k] + xi[2] * hat[2][k]) / xi2;
    for (int c = 0; c < 3; ++c) hat[static_cast<std::size_t>(c)][k] -= xi[c] * div;
  }

  auto out = f;
  const double norm = 1.0 / static_cast<double>(f.grid.size());
  for (int c = 0; c < 3; ++c) {
    std::copy(hat[static_cast<std::size_t>(c)].begin(), hat[static_cast<std::size_t>(c)].end(),
              fft.spectrum().begin());
    fft.backward();
    auto dst = out.component(c);
    const auto src = fft.real();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] * norm;
  }
  return out;
}

}  // namespace stochinv
