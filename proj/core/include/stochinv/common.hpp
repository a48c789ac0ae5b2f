#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace stochinv {

using cplx = std::complex<double>;

// Points, directions and frequencies always carry three components. In two
// dimensions the third component is zero and only the leading 2x2 block of a
// matrix is meaningful.
using Vec3 = Eigen::Vector3d;
using RMat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;
using CVec3 = Eigen::Vector3cd;

inline constexpr double kPi = std::numbers::pi;

enum class ErrorCode {
  OrderOutOfRange,
  SupportViolation,
  NotNonnegDefinite,
  InvalidModel,
  InvalidGrid,
  LameViolation,
  SmoothnessTooLow,
  DomainError,
  CoincidentPoints,
  TargetInsideSupport,
  DimensionMismatch,
  EnsembleTooSmall,
  EmptyInput,
  FrequencyTooHigh,
  ThetaSingular,
  NonHermitianInput,
  IoError,
  ConfigInvalid,
  StageFailure,
  SeriesMissing,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Identity on the first `d` coordinates, zero elsewhere.
inline RMat3 identity(int d) {
  RMat3 eye = RMat3::Zero();
  for (int i = 0; i < d; ++i) eye(i, i) = 1.0;
  return eye;
}

/// Frobenius norm of the leading d x d block.
inline double frobenius(const CMat3& a, int d) { return a.topLeftCorner(d, d).norm(); }
inline double frobenius(const RMat3& a, int d) { return a.topLeftCorner(d, d).norm(); }

/// Constant of the outgoing far-field asymptotics: e^{i pi/4}/sqrt(8 pi) in 2D, 1/(4 pi) in 3D.
cplx beta(int d);

}  // namespace stochinv
