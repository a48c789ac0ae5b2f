#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stochinv/farfield.hpp"
#include "stochinv/params.hpp"

namespace stochinv {

enum class Pathway { MonteCarlo, Analytic };

std::string_view to_string(Pathway p) noexcept;
Pathway pathway_from_string(std::string_view name);

/// E[u_inf(xhat) u_inf(yhat)^T] -- a plain (outer) product, never conjugated.
/// Scalar records use value(0, 0). `entry_stderr` holds sqrt(var Re + var Im)/sqrt(n) per
/// entry; `stderr` is its largest entry.
struct CorrelationRecord {
  Vec3 x = Vec3::Zero();
  Vec3 y = Vec3::Zero();
  double k = 0.0;
  int dim = 2;
  bool matrix = false;
  Channel channel = Channel::Scalar;
  CMat3 value = CMat3::Zero();
  std::int64_t n_samples = 0;
  double stderr = 0.0;
  RMat3 entry_stderr = RMat3::Zero();
  Pathway pathway = Pathway::Analytic;

  cplx scalar() const { return value(0, 0); }
  /// |value| for scalars, Frobenius norm of the leading dim x dim block otherwise.
  double norm() const;
};

/// Streaming mean/variance of the products u(x) u(y)^T (Chan et al. pairwise update), so
/// partial accumulators over disjoint batches merge exactly as if accumulated serially
/// up to rounding; merging in a fixed order keeps results bit-reproducible.
class CorrelationAccumulator {
 public:
  CorrelationAccumulator(bool matrix, int dim);

  void add(const CVec3& ux, const CVec3& uy);
  void merge(const CorrelationAccumulator& other);

  std::int64_t count() const noexcept { return n_; }
  CorrelationRecord record(const Vec3& x, const Vec3& y, double k, Channel channel) const;

 private:
  bool matrix_;
  int dim_;
  std::int64_t n_ = 0;
  RMat3 mean_re_ = RMat3::Zero();
  RMat3 mean_im_ = RMat3::Zero();
  RMat3 m2_re_ = RMat3::Zero();
  RMat3 m2_im_ = RMat3::Zero();
};

/// Monte Carlo estimate from paired far-field ensembles (entry i of both spans comes from
/// realization i).
CorrelationRecord mc_correlation(std::span<const FarFieldSample> at_x, std::span<const FarFieldSample> at_y);

using ScalarSpectrum = std::function<cplx(const Vec3&)>;
using MatrixSpectrum = std::function<CMat3(const Vec3&)>;

ScalarSpectrum closed_form_spectrum(const GaussianStrength& sigma);
MatrixSpectrum closed_form_matrix_spectrum(const GaussianStrength& sigma);
ScalarSpectrum quadrature_spectrum(const StrengthField& sigma);
MatrixSpectrum quadrature_matrix_spectrum(const StrengthField& sigma);

/// (beta_d^2/n^2) k^{d+1-4n-m} sigmahat(k(xhat + yhat)).
CorrelationRecord analytic_correlation_poly(const ScalarSpectrum& sigma_hat, double k, int n, int d, double m,
                                            const Vec3& x, const Vec3& y);
/// -k^2 beta_3^2 k^{-m} sigmahat(k(xhat + yhat)).
CorrelationRecord analytic_correlation_em(const MatrixSpectrum& sigma_hat, double k, double m, const Vec3& x,
                                          const Vec3& y);
/// p: beta^2 c_p^{d+2-m} k^{d-3-m} xx^T sigmahat(k_p(x+y)) yy^T;
/// s: beta^2 c_s^{d+2-m} k^{d-3-m} (I-xx^T) sigmahat(k_s(x+y)) (I-yy^T).
CorrelationRecord analytic_correlation_elastic(const MatrixSpectrum& sigma_hat, double k, const LameParameters& lame,
                                               int d, double m, const Vec3& x, const Vec3& y, Channel branch);

/// All ordered pairs of `dirs`, followed by every antipodal pair (x, -x).
std::vector<std::pair<Vec3, Vec3>> direction_pairs(std::span<const Vec3> dirs);
/// Only the antipodal pairs (x, -x).
std::vector<std::pair<Vec3, Vec3>> antipodal_pairs(std::span<const Vec3> dirs);

struct SupStatistic {
  double k = 0.0;
  double M = 0.0;
  /// Uncertainty of M: stderr of the maximizing record (0 on the analytic pathway).
  double stderr = 0.0;
  std::size_t pairs = 0;
  int resolution = 0;
  ModelKind model = ModelKind::Polyharmonic;
};

SupStatistic sup_statistic(std::span<const CorrelationRecord> records, ModelKind model, int resolution);

struct SandwichReport {
  double M = 0.0;
  double lower = 0.0;
  std::optional<double> upper;  // only the polyharmonic estimate has an upper side
  double slack = 0.0;
  bool within = false;
};

/// The strength norm each model's estimate is phrased in: ||sigma||_L1 (polyharmonic),
/// ||int sigma||_F (electromagnetic), ||Tr sigma||_L1 (elastic).
double bound_norm(const WaveModel& model, const StrengthField& sigma);

/// Checks lower <= M <= upper, each side widened by `slack` (e.g. 4 stderr on the MC pathway)
/// plus a 1e-12 relative rounding allowance. C1 is the residual budget (0 on the analytic pathway).
SandwichReport sandwich_check(const SupStatistic& M, double strength_norm, const WaveModel& model, double m, double C1,
                              double slack = 0.0);
SandwichReport sandwich_check(const SupStatistic& M, const StrengthField& sigma, const WaveModel& model, double m,
                              double C1, double slack = 0.0);

}  // namespace stochinv
