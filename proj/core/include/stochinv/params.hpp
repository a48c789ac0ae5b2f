#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "stochinv/common.hpp"

namespace stochinv {

enum class ModelKind { Polyharmonic, Electromagnetic, Elastic };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind model_kind_from_string(std::string_view name);

struct LameParameters {
  double lambda = 0.0;
  double mu = 1.0;

  bool operator==(const LameParameters&) const = default;
};

/// Half-open interval (lo, hi] of admissible covariance orders m.
struct OrderInterval {
  double lo;
  double hi;

  bool contains(double m) const noexcept { return m > lo && m <= hi; }
  bool empty() const noexcept { return !(hi > lo); }
};

class WaveModel {
 public:
  static WaveModel polyharmonic(int d, int n);
  static WaveModel electromagnetic();
  static WaveModel elastic(int d, double lambda, double mu);

  ModelKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return d_; }
  /// Polyharmonic order n; 1 for the vector models.
  int order() const noexcept { return n_; }
  const LameParameters& lame() const noexcept { return lame_; }
  bool vector_valued() const noexcept { return kind_ != ModelKind::Polyharmonic; }

  OrderInterval admissible_order() const noexcept;

  /// Strict lower bound on the smoothness index s required by the stability estimate.
  double smoothness_floor() const noexcept;

  bool operator==(const WaveModel&) const = default;

 private:
  WaveModel(ModelKind kind, int d, int n, LameParameters lame) : kind_(kind), d_(d), n_(n), lame_(lame) {}

  ModelKind kind_;
  int d_;
  int n_;
  LameParameters lame_;
};

/// Uniform periodic box [-L/2, L/2)^d with N nodes per axis. Node i sits at -L/2 + i*h.
/// Linear index is row-major with the last axis fastest.
class SpatialGrid {
 public:
  SpatialGrid(int d, int points_per_axis, double box_length = 4.0);

  int dim() const noexcept { return d_; }
  int points_per_axis() const noexcept { return n_; }
  double box_length() const noexcept { return box_; }
  double spacing() const noexcept { return box_ / n_; }
  double cell_volume() const noexcept;
  std::size_t size() const noexcept { return size_; }

  double coordinate(int i) const noexcept { return -0.5 * box_ + i * spacing(); }
  std::array<int, 3> unravel(std::size_t index) const noexcept;
  Vec3 node(std::size_t index) const noexcept;

  bool operator==(const SpatialGrid&) const = default;

 private:
  int d_;
  int n_;
  double box_;
  std::size_t size_;
};

/// Strength sigma on a grid: scalar (polyharmonic) or symmetric d x d matrix per node.
class StrengthField {
 public:
  static StrengthField scalar(SpatialGrid grid, std::vector<double> values);
  static StrengthField matrix(SpatialGrid grid, std::vector<RMat3> values);

  const SpatialGrid& grid() const noexcept { return grid_; }
  bool is_matrix() const noexcept { return std::holds_alternative<std::vector<RMat3>>(values_); }

  std::span<const double> scalar_values() const;
  std::span<const RMat3> matrix_values() const;

  /// Nodal trace (matrix) or value (scalar).
  std::vector<double> trace_values() const;

  /// Trapezoidal integral of sigma (scalar) or of Tr sigma (matrix).
  double l1_norm() const;
  /// Max |sigma| or max nodal Frobenius norm.
  double sup_norm() const;

  StrengthField scaled(double factor) const;

  bool operator==(const StrengthField&) const = default;

 private:
  StrengthField(SpatialGrid grid, std::variant<std::vector<double>, std::vector<RMat3>> values)
      : grid_(grid), values_(std::move(values)) {}

  SpatialGrid grid_;
  std::variant<std::vector<double>, std::vector<RMat3>> values_;
};

/// amplitude * exp(-|x - center|^2 / (2 width^2)) * weight. The weight is ignored for scalar strengths.
struct GaussianBump {
  Vec3 center = Vec3::Zero();
  double width = 0.15;
  double amplitude = 1.0;
  RMat3 weight = RMat3::Identity();
};

/// Sum of Gaussian bumps with closed-form Fourier transform. Used as the planted strength in
/// experiments and as the exact-spectrum reference for the analytic correlation pathway.
class GaussianStrength {
 public:
  GaussianStrength(int d, std::vector<GaussianBump> bumps, bool matrix_valued);

  int dim() const noexcept { return d_; }
  bool matrix_valued() const noexcept { return matrix_; }
  std::span<const GaussianBump> bumps() const noexcept { return bumps_; }

  double scalar_at(const Vec3& x) const;
  RMat3 matrix_at(const Vec3& x) const;

  /// integral of e^{-i gamma . x} sigma(x) dx over R^d (unclamped bumps).
  cplx transform(const Vec3& gamma) const;
  CMat3 matrix_transform(const Vec3& gamma) const;

  /// Sample onto the grid, zeroing every node with |x| >= 1.
  /// Throws SupportViolation when the discarded mass exceeds 1e-6 of the total.
  StrengthField rasterize(const SpatialGrid& grid) const;

  GaussianStrength scaled(double factor) const;

 private:
  int d_;
  std::vector<GaussianBump> bumps_;
  bool matrix_;
};

StrengthField gaussian_bump_strength(const SpatialGrid& grid, const Vec3& center, double width, double amplitude);

/// amplitude * cos^power(pi |x - center| / (2 radius)) * weight on |x - center| < radius, zero elsewhere.
/// Compactly supported by construction, so no clamping; needs |center| + radius <= 1.
/// Its transform has no closed form and is evaluated by grid quadrature.
struct RaisedCosineBump {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double power = 4.0;
  double amplitude = 1.0;
  RMat3 weight = RMat3::Identity();
};

StrengthField raised_cosine_strength(const SpatialGrid& grid, const RaisedCosineBump& bump, bool matrix_valued = false);

struct SourceSpec {
  double m = 2.0;
  int s = 4;
  StrengthField strength;
};

/// A source specification that passed `validate_source` for a given model.
class CheckedSource {
 public:
  const WaveModel& model() const noexcept { return model_; }
  const SourceSpec& spec() const noexcept { return spec_; }
  const StrengthField& strength() const noexcept { return spec_.strength; }
  const SpatialGrid& grid() const noexcept { return spec_.strength.grid(); }

 private:
  friend CheckedSource validate_source(const WaveModel& model, const SourceSpec& spec);
  CheckedSource(WaveModel model, SourceSpec spec) : model_(model), spec_(std::move(spec)) {}

  WaveModel model_;
  SourceSpec spec_;
};

/// Checks the order interval, compact support in the open unit ball and non-negativity
/// (non-negative definiteness for matrix strengths, with tolerance 1e-10 times the
/// largest nodal Frobenius norm).
CheckedSource validate_source(const WaveModel& model, const SourceSpec& spec);

}  // namespace stochinv
