#include "stochinv/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace stochinv {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Polyharmonic: return "polyharmonic";
    case ModelKind::Electromagnetic: return "electromagnetic";
    case ModelKind::Elastic: return "elastic";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "polyharmonic") return ModelKind::Polyharmonic;
  if (name == "electromagnetic") return ModelKind::Electromagnetic;
  if (name == "elastic") return ModelKind::Elastic;
  throw Error(ErrorCode::InvalidModel, "unknown model kind '" + std::string(name) + "'");
}

WaveModel WaveModel::polyharmonic(int d, int n) {
  if (d != 2 && d != 3) throw Error(ErrorCode::InvalidModel, "polyharmonic model needs d in {2,3}");
  if (n < 1) throw Error(ErrorCode::InvalidModel, "polyharmonic order n must be >= 1");
  return WaveModel(ModelKind::Polyharmonic, d, n, {});
}

WaveModel WaveModel::electromagnetic() { return WaveModel(ModelKind::Electromagnetic, 3, 1, {}); }

WaveModel WaveModel::elastic(int d, double lambda, double mu) {
  if (d != 2 && d != 3) throw Error(ErrorCode::InvalidModel, "elastic model needs d in {2,3}");
  if (!(mu > 0.0) || !(lambda + mu > 0.0)) {
    throw Error(ErrorCode::LameViolation, "Lame constants need mu > 0 and lambda + mu > 0");
  }
  return WaveModel(ModelKind::Elastic, d, 1, {lambda, mu});
}

OrderInterval WaveModel::admissible_order() const noexcept {
  switch (kind_) {
    case ModelKind::Polyharmonic: return {static_cast<double>(d_ + 2 - 4 * n_), static_cast<double>(d_)};
    case ModelKind::Electromagnetic: return {-1.0, 3.0};
    case ModelKind::Elastic: return {static_cast<double>(d_ - 2), static_cast<double>(d_)};
  }
  return {0.0, 0.0};
}

double WaveModel::smoothness_floor() const noexcept {
  const double d = d_;
  switch (kind_) {
    case ModelKind::Polyharmonic: return std::max(d / 4.0 + 2.0 * n_ - 1.0, d);
    case ModelKind::Electromagnetic: return 3.0;
    case ModelKind::Elastic: return std::max(d / 4.0 + 1.0, d);
  }
  return d;
}

SpatialGrid::SpatialGrid(int d, int points_per_axis, double box_length)
    : d_(d), n_(points_per_axis), box_(box_length), size_(0) {
  if (d != 2 && d != 3) throw Error(ErrorCode::InvalidGrid, "grid dimension must be 2 or 3");
  if (points_per_axis < 2 || !std::has_single_bit(static_cast<unsigned>(points_per_axis))) {
    throw Error(ErrorCode::InvalidGrid, "points per axis must be a power of two");
  }
  if (!(box_length >= 2.0)) throw Error(ErrorCode::InvalidGrid, "box length must be >= 2 to cover the unit ball");
  size_ = 1;
  for (int i = 0; i < d; ++i) size_ *= static_cast<std::size_t>(points_per_axis);
}

double SpatialGrid::cell_volume() const noexcept { return std::pow(spacing(), d_); }

std::array<int, 3> SpatialGrid::unravel(std::size_t index) const noexcept {
  std::array<int, 3> ijk{0, 0, 0};
  const auto n = static_cast<std::size_t>(n_);
  for (int axis = d_ - 1; axis >= 0; --axis) {
    ijk[axis] = static_cast<int>(index % n);
    index /= n;
  }
  return ijk;
}

Vec3 SpatialGrid::node(std::size_t index) const noexcept {
  const auto ijk = unravel(index);
  Vec3 x = Vec3::Zero();
  for (int axis = 0; axis < d_; ++axis) x[axis] = coordinate(ijk[axis]);
  return x;
}

StrengthField StrengthField::scalar(SpatialGrid grid, std::vector<double> values) {
  if (values.size() != grid.size()) throw Error(ErrorCode::DimensionMismatch, "strength size does not match grid");
  return StrengthField(grid, std::move(values));
}

StrengthField StrengthField::matrix(SpatialGrid grid, std::vector<RMat3> values) {
  if (values.size() != grid.size()) throw Error(ErrorCode::DimensionMismatch, "strength size does not match grid");
  return StrengthField(grid, std::move(values));
}

std::span<const double> StrengthField::scalar_values() const {
  if (is_matrix()) throw Error(ErrorCode::DimensionMismatch, "strength is matrix valued");
  return std::get<std::vector<double>>(values_);
}

std::span<const RMat3> StrengthField::matrix_values() const {
  if (!is_matrix()) throw Error(ErrorCode::DimensionMismatch, "strength is scalar valued");
  return std::get<std::vector<RMat3>>(values_);
}

std::vector<double> StrengthField::trace_values() const {
  if (!is_matrix()) {
    const auto& v = std::get<std::vector<double>>(values_);
    return {v.begin(), v.end()};
  }
  const auto& mats = std::get<std::vector<RMat3>>(values_);
  std::vector<double> out(mats.size());
  const int d = grid_.dim();
  std::transform(mats.begin(), mats.end(), out.begin(),
                 [d](const RMat3& a) { return a.topLeftCorner(d, d).trace(); });
  return out;
}

double StrengthField::l1_norm() const {
  double sum = 0.0;
  for (double v : trace_values()) sum += std::abs(v);
  return sum * grid_.cell_volume();
}

double StrengthField::sup_norm() const {
  double best = 0.0;
  if (is_matrix()) {
    for (const auto& a : std::get<std::vector<RMat3>>(values_)) best = std::max(best, frobenius(a, grid_.dim()));
  } else {
    for (double v : std::get<std::vector<double>>(values_)) best = std::max(best, std::abs(v));
  }
  return best;
}

StrengthField StrengthField::scaled(double factor) const {
  return std::visit(
      [&](const auto& values) {
        auto copy = values;
        for (auto& v : copy) v = v * factor;
        return StrengthField(grid_, std::move(copy));
      },
      values_);
}

GaussianStrength::GaussianStrength(int d, std::vector<GaussianBump> bumps, bool matrix_valued)
    : d_(d), bumps_(std::move(bumps)), matrix_(matrix_valued) {
  if (d != 2 && d != 3) throw Error(ErrorCode::DimensionMismatch, "Gaussian strength needs d in {2,3}");
  const RMat3 mask = identity(d) * RMat3::Ones() * identity(d);
  for (auto& b : bumps_) {
    if (!(b.width > 0.0)) throw Error(ErrorCode::DomainError, "bump width must be positive");
    if (b.center.norm() >= 1.0) throw Error(ErrorCode::SupportViolation, "bump center must lie in the unit ball");
    if (d == 2) b.center[2] = 0.0;
    b.weight = b.weight.cwiseProduct(mask);
  }
}

double GaussianStrength::scalar_at(const Vec3& x) const {
  double sum = 0.0;
  for (const auto& b : bumps_) sum += b.amplitude * std::exp(-(x - b.center).squaredNorm() / (2.0 * b.width * b.width));
  return sum;
}

RMat3 GaussianStrength::matrix_at(const Vec3& x) const {
  RMat3 sum = RMat3::Zero();
  for (const auto& b : bumps_) {
    sum += b.amplitude * std::exp(-(x - b.center).squaredNorm() / (2.0 * b.width * b.width)) * b.weight;
  }
  return sum;
}

namespace {

cplx bump_transform(const GaussianBump& b, const Vec3& gamma, int d) {
  const double a2 = b.width * b.width;
  const double mass = b.amplitude * std::pow(2.0 * kPi * a2, 0.5 * d);
  return mass * std::exp(-0.5 * a2 * gamma.squaredNorm()) * std::polar(1.0, -gamma.dot(b.center));
}

}  // namespace

cplx GaussianStrength::transform(const Vec3& gamma) const {
  cplx sum = 0.0;
  for (const auto& b : bumps_) sum += bump_transform(b, gamma, d_);
  return sum;
}

CMat3 GaussianStrength::matrix_transform(const Vec3& gamma) const {
  CMat3 sum = CMat3::Zero();
  for (const auto& b : bumps_) sum += bump_transform(b, gamma, d_) * b.weight.cast<cplx>();
  return sum;
}

StrengthField GaussianStrength::rasterize(const SpatialGrid& grid) const {
  if (grid.dim() != d_) throw Error(ErrorCode::DimensionMismatch, "grid dimension differs from strength dimension");
  double total = 0.0;
  double discarded = 0.0;
  const auto mass_of = [&](const Vec3& x) {
    return matrix_ ? std::abs(matrix_at(x).trace()) : std::abs(scalar_at(x));
  };
  if (matrix_) {
    std::vector<RMat3> values(grid.size(), RMat3::Zero());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Vec3 x = grid.node(i);
      const double w = mass_of(x);
      total += w;
      if (x.squaredNorm() >= 1.0) {
        discarded += w;
      } else {
        values[i] = matrix_at(x);
      }
    }
    if (total > 0.0 && discarded > 1e-6 * total) {
      throw Error(ErrorCode::SupportViolation, "clamping to the unit ball discards more than 1e-6 of the mass");
    }
    return StrengthField::matrix(grid, std::move(values));
  }
  std::vector<double> values(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.node(i);
    const double v = scalar_at(x);
    total += std::abs(v);
    if (x.squaredNorm() >= 1.0) {
      discarded += std::abs(v);
    } else {
      values[i] = v;
    }
  }
  if (total > 0.0 && discarded > 1e-6 * total) {
    throw Error(ErrorCode::SupportViolation, "clamping to the unit ball discards more than 1e-6 of the mass");
  }
  return StrengthField::scalar(grid, std::move(values));
}

GaussianStrength GaussianStrength::scaled(double factor) const {
  auto copy = bumps_;
  for (auto& b : copy) b.amplitude *= factor;
  return GaussianStrength(d_, std::move(copy), matrix_);
}

StrengthField gaussian_bump_strength(const SpatialGrid& grid, const Vec3& center, double width, double amplitude) {
  return GaussianStrength(grid.dim(), {GaussianBump{center, width, amplitude, RMat3::Identity()}}, false)
      .rasterize(grid);
}

StrengthField raised_cosine_strength(const SpatialGrid& grid, const RaisedCosineBump& bump, bool matrix_valued) {
  if (!(bump.radius > 0.0) || !(bump.power >= 0.0)) {
    throw Error(ErrorCode::DomainError, "raised cosine needs radius > 0 and power >= 0");
  }
  Vec3 center = bump.center;
  if (grid.dim() == 2) center[2] = 0.0;
  if (center.norm() + bump.radius > 1.0 + 1e-14) {
    throw Error(ErrorCode::SupportViolation, "raised cosine bump leaves the unit ball");
  }
  const auto profile = [&](const Vec3& x) {
    const double r = (x - center).norm();
    return r < bump.radius ? bump.amplitude * std::pow(std::cos(0.5 * kPi * r / bump.radius), bump.power) : 0.0;
  };
  if (matrix_valued) {
    const RMat3 weight = identity(grid.dim()) * bump.weight * identity(grid.dim());
    std::vector<RMat3> values(grid.size(), RMat3::Zero());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = profile(grid.node(i)) * weight;
    return StrengthField::matrix(grid, std::move(values));
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = profile(grid.node(i));
  return StrengthField::scalar(grid, std::move(values));
}

namespace {

void check_support(const SpatialGrid& grid, const std::vector<double>& mass) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (mass[i] != 0.0 && grid.node(i).squaredNorm() >= 1.0) {
      throw Error(ErrorCode::SupportViolation, "strength is nonzero outside the open unit ball");
    }
  }
}

}  // namespace

CheckedSource validate_source(const WaveModel& model, const SourceSpec& spec) {
  const auto interval = model.admissible_order();
  if (!interval.contains(spec.m)) {
    throw Error(ErrorCode::OrderOutOfRange, "m = " + std::to_string(spec.m) + " outside (" +
                                                std::to_string(interval.lo) + ", " + std::to_string(interval.hi) + "]");
  }
  if (spec.s < 1) throw Error(ErrorCode::SmoothnessTooLow, "smoothness index s must be a positive integer");
  const auto& field = spec.strength;
  const int d = model.dim();
  if (field.grid().dim() != d) throw Error(ErrorCode::DimensionMismatch, "strength grid dimension differs from model");
  if (field.is_matrix() != model.vector_valued()) {
    throw Error(ErrorCode::DimensionMismatch, "strength rank does not match the wave model");
  }

  if (!field.is_matrix()) {
    const auto values = field.scalar_values();
    const double tol = 1e-10 * field.sup_norm();
    std::vector<double> mass(values.begin(), values.end());
    for (double v : values) {
      if (!std::isfinite(v) || v < -tol) throw Error(ErrorCode::NotNonnegDefinite, "scalar strength must be >= 0");
    }
    check_support(field.grid(), mass);
    return CheckedSource(model, spec);
  }

  const auto mats = field.matrix_values();
  const double tol = 1e-10 * field.sup_norm();
  std::vector<double> mass(mats.size());
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const RMat3& a = mats[i];
    mass[i] = a.cwiseAbs().sum();
    if (mass[i] == 0.0) continue;
    if (!a.allFinite()) throw Error(ErrorCode::NotNonnegDefinite, "non-finite strength matrix");
    if ((a - a.transpose()).norm() > tol) throw Error(ErrorCode::NotNonnegDefinite, "strength matrix not symmetric");
    if (d == 2 && (a.row(2).norm() > 0.0 || a.col(2).norm() > 0.0)) {
      throw Error(ErrorCode::DimensionMismatch, "2D strength matrices must vanish outside the leading 2x2 block");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.topLeftCorner(d, d));
    if (eig.eigenvalues().minCoeff() < -tol) {
      throw Error(ErrorCode::NotNonnegDefinite, "strength matrix has eigenvalue " +
                                                    std::to_string(eig.eigenvalues().minCoeff()));
    }
  }
  check_support(field.grid(), mass);
  return CheckedSource(model, spec);
}

}  // namespace stochinv
