#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stochinv/correlation.hpp"
#include "stochinv/farfield.hpp"
#include "stochinv/params.hpp"

namespace stochinv {

/// Observation directions whose sum hits a target frequency: k(x + y) = gamma.
struct DirectionPair {
  Vec3 gamma = Vec3::Zero();
  double k = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 y = Vec3::Zero();
  Vec3 d1 = Vec3::Zero();
};

/// d1 is the canonical basis vector least aligned with gamma, orthonormalized against it
/// (e_1 at gamma = 0); x, y = (gamma +- sqrt(4k^2 - |gamma|^2) d1) / (2k).
/// Throws FrequencyTooHigh when |gamma| > 2k.
DirectionPair directions_for_gamma(const Vec3& gamma, double k, int d);

/// Unit vector orthogonal to gamma used by the probes above.
Vec3 probe_normal(const Vec3& gamma, int d);

struct ThetaSystem {
  double theta_p;
  double theta_s;
  Eigen::Matrix2d theta;
  double det;

  ThetaSystem(double gamma_norm, const ElasticWavenumbers& w);

  /// Solves Theta [b11, b22]^T = rhs. Throws ThetaSingular if |det| < 1e-12.
  std::array<cplx, 2> solve(cplx p_value, cplx s_value) const;
};

/// (n^2/beta_d^2) k^{m+4n-d-1} F.
cplx recover_sigma_hat_poly(cplx F, const Vec3& gamma, double k, int n, int d, double m);
/// -k^{m-2} beta_3^{-2} C.
CMat3 recover_sigma_hat_em(const CMat3& corr, const Vec3& gamma, double k, double m);

/// Correlation matrix of one elastic branch at a direction pair.
using BranchCorrelation = std::function<CMat3(const Vec3& x, const Vec3& y)>;

/// Diagonal of the Fourier coefficient matrix in the frame (gamma_hat, nu_1, nu_2).
/// At gamma = 0 (|gamma| < 1e-8 k_p) the frame is the canonical basis.
struct ElasticProbe {
  std::array<cplx, 3> b{cplx(0.0), cplx(0.0), cplx(0.0)};
  cplx trace = 0.0;
  double det = 1.0;
  bool antipodal = false;
};

ElasticProbe probe_elastic(const BranchCorrelation& p_branch, const BranchCorrelation& s_branch, const Vec3& gamma,
                           double k, const LameParameters& lame, double m, int d);

cplx recover_trace_hat_elastic(const BranchCorrelation& p_branch, const BranchCorrelation& s_branch,
                               const Vec3& gamma, double k, const LameParameters& lame, double m, int d);

/// Cartesian frequency lattice {spacing * j : |spacing * j| <= rho}, j integer, in
/// lexicographic order. The lattice is centrally symmetric, so node size()-1-i is -node i.
class FourierCoefficientGrid {
 public:
  FourierCoefficientGrid(int d, double rho, double spacing, bool matrix = false);

  /// Nyquist spacing pi/L for a box of length L.
  static FourierCoefficientGrid for_box(const SpatialGrid& grid, double rho, bool matrix = false);

  int dim() const noexcept { return d_; }
  double rho() const noexcept { return rho_; }
  double spacing() const noexcept { return spacing_; }
  bool matrix() const noexcept { return matrix_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  int max_index() const noexcept { return max_index_; }

  const std::array<int, 3>& index(std::size_t i) const { return nodes_[i]; }
  Vec3 gamma(std::size_t i) const;
  std::size_t mirror(std::size_t i) const noexcept { return nodes_.size() - 1 - i; }

  std::vector<cplx> values;
  std::vector<CMat3> matrices;

 private:
  int d_;
  double rho_;
  double spacing_;
  bool matrix_;
  int max_index_;
  std::vector<std::array<int, 3>> nodes_;
};

/// value(gamma) <- (value(gamma) + conj value(-gamma)) / 2.
void hermitian_symmetrize(FourierCoefficientGrid& coeffs);

struct ReconstructionResult {
  StrengthField recovered;
  double rho = 0.0;
  double k = 0.0;
  double imag_residue = 0.0;
  std::optional<double> sup_error;
  std::optional<double> l1_error;
};

/// sigma(x) = (2 pi)^{-d} sum_{|gamma| <= rho} e^{i gamma.x} value(gamma) spacing^d, evaluated
/// with separable staged sums. Throws NonHermitianInput when the imaginary part exceeds
/// 1e-10 of the amplitude.
ReconstructionResult inverse_fourier_cutoff(const FourierCoefficientGrid& coeffs, const SpatialGrid& output);

/// Fills sup_error / l1_error (Frobenius per node for matrices).
void compare_to(ReconstructionResult& result, const StrengthField& planted);

void save_reconstruction(const std::filesystem::path& stem, const ReconstructionResult& result);

struct ProbeRow {
  double k = 0.0;
  double M = 0.0;
  double k_power = 0.0;
  double strength_sup = 0.0;
  double ratio = 0.0;
  double l1_lhs = 0.0;
  double l1_rhs = 0.0;
  bool l1_holds = false;
  bool l1_asserted = false;
  double rho_theory = 0.0;
  Pathway pathway = Pathway::Analytic;
};

/// Per k: M(k), the stability estimate's k-power, ||sigma||_inf / (k-power M) and the L1-type
/// bound. `sup_at(k)` supplies M(k) along the given pathway. The bound is asserted
/// (l1_asserted) on the analytic pathway for k >= 8. Throws SmoothnessTooLow when s does not
/// exceed the model's floor.
std::vector<ProbeRow> stability_probe(const CheckedSource& planted, std::span<const double> ks, Pathway pathway,
                                      const std::function<SupStatistic(double)>& sup_at);

}  // namespace stochinv
