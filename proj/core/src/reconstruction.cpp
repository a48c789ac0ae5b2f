#include "stochinv/reconstruction.hpp"

#include <cmath>

#include "stochinv/io.hpp"

namespace stochinv {

Vec3 probe_normal(const Vec3& gamma, int d) {
  const double g = gamma.norm();
  if (g == 0.0) return Vec3::UnitX();
  const Vec3 u = gamma / g;
  int best = 0;
  for (int i = 1; i < d; ++i) {
    if (std::abs(u[i]) < std::abs(u[best])) best = i;
  }
  Vec3 e = Vec3::Zero();
  e[best] = 1.0;
  Vec3 d1 = e - u[best] * u;
  return d1 / d1.norm();
}

DirectionPair directions_for_gamma(const Vec3& gamma, double k, int d) {
  if (!(k > 0.0)) throw Error(ErrorCode::DomainError, "wavenumber must be positive");
  const double g2 = gamma.squaredNorm();
  if (std::sqrt(g2) > 2.0 * k) throw Error(ErrorCode::FrequencyTooHigh, "|gamma| exceeds 2k");
  DirectionPair p;
  p.gamma = gamma;
  p.k = k;
  p.d1 = probe_normal(gamma, d);
  const double root = std::sqrt(std::max(0.0, 4.0 * k * k - g2));
  p.x = (gamma + root * p.d1) / (2.0 * k);
  p.y = (gamma - root * p.d1) / (2.0 * k);
  return p;
}

ThetaSystem::ThetaSystem(double gamma_norm, const ElasticWavenumbers& w) {
  theta_p = gamma_norm / (2.0 * w.k_p);
  theta_s = gamma_norm / (2.0 * w.k_s);
  const double p2 = theta_p * theta_p;
  const double s2 = theta_s * theta_s;
  theta << p2, -(1.0 - p2), 1.0 - s2, -s2;
  det = 1.0 - p2 - s2;
}

std::array<cplx, 2> ThetaSystem::solve(cplx p_value, cplx s_value) const {
  if (std::abs(det) < 1e-12) throw Error(ErrorCode::ThetaSingular, "Theta system is singular");
  // Cramer's rule on the 2x2 system.
  const cplx b11 = (p_value * theta(1, 1) - theta(0, 1) * s_value) / det;
  const cplx b22 = (theta(0, 0) * s_value - theta(1, 0) * p_value) / det;
  return {b11, b22};
}

namespace {

void check_recovery_k(double k) {
  if (!(k > 1.0)) throw Error(ErrorCode::DomainError, "recovery needs k > 1");
}

}  // namespace

cplx recover_sigma_hat_poly(cplx F, const Vec3& gamma, double k, int n, int d, double m) {
  check_recovery_k(k);
  if (gamma.norm() > 2.0 * k) throw Error(ErrorCode::FrequencyTooHigh, "|gamma| exceeds 2k");
  const cplx b = beta(d);
  return static_cast<double>(n * n) / (b * b) * std::pow(k, m + 4 * n - d - 1) * F;
}

CMat3 recover_sigma_hat_em(const CMat3& corr, const Vec3& gamma, double k, double m) {
  check_recovery_k(k);
  if (gamma.norm() > 2.0 * k) throw Error(ErrorCode::FrequencyTooHigh, "|gamma| exceeds 2k");
  const double b = beta(3).real();
  return -(std::pow(k, m - 2.0) / (b * b)) * corr;
}

ElasticProbe probe_elastic(const BranchCorrelation& p_branch, const BranchCorrelation& s_branch, const Vec3& gamma,
                           double k, const LameParameters& lame, double m, int d) {
  check_recovery_k(k);
  const ElasticWavenumbers w(k, lame);
  const double g = gamma.norm();
  if (g > w.k_p) throw Error(ErrorCode::FrequencyTooHigh, "|gamma| exceeds k_p");
  const cplx b2 = beta(d) * beta(d);
  const cplx scale_p = std::pow(w.c_p, m - d - 2) * std::pow(k, m - d + 3) / b2;
  const cplx scale_s = std::pow(w.c_s, m - d - 2) * std::pow(k, m - d + 3) / b2;
  const auto bilinear = [](const Vec3& a, const CMat3& c, const Vec3& b) {
    return (a.cast<cplx>().transpose() * c * b.cast<cplx>())(0, 0);
  };

  ElasticProbe out;
  if (g < 1e-8 * w.k_p) {
    // x = e_i, y = -e_i: x^T C_p y = -pre * e_i^T sigmahat(0) e_i.
    out.antipodal = true;
    for (int i = 0; i < d; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = 1.0;
      out.b[static_cast<std::size_t>(i)] = -scale_p * bilinear(e, p_branch(e, -e), -e);
      out.trace += out.b[static_cast<std::size_t>(i)];
    }
    return out;
  }

  const Vec3 gh = gamma / g;
  const auto pp = directions_for_gamma(gamma, w.k_p, d);
  const auto ps = directions_for_gamma(gamma, w.k_s, d);
  const Vec3 nu1 = pp.d1;
  const double root_s = std::sqrt(std::max(0.0, 4.0 * w.k_s * w.k_s - g * g));
  const Vec3 rho1 = (root_s * gamma - g * g * nu1) / (2.0 * w.k_s * g);
  const Vec3 rho2 = (root_s * gamma + g * g * nu1) / (2.0 * w.k_s * g);

  const cplx p_value = scale_p * bilinear(pp.x, p_branch(pp.x, pp.y), pp.y);
  const CMat3 cs = s_branch(ps.x, ps.y);
  const cplx s_value = scale_s * bilinear(rho1, cs, rho2);

  const ThetaSystem theta(g, w);
  out.det = theta.det;
  const auto b = theta.solve(p_value, s_value);
  out.b[0] = b[0];
  out.b[1] = b[1];
  out.trace = b[0] + b[1];
  if (d == 3) {
    const Vec3 nu2 = gh.cross(nu1);
    out.b[2] = scale_s * bilinear(nu2, cs, nu2);
    out.trace += out.b[2];
  }
  return out;
}

cplx recover_trace_hat_elastic(const BranchCorrelation& p_branch, const BranchCorrelation& s_branch,
                               const Vec3& gamma, double k, const LameParameters& lame, double m, int d) {
  return probe_elastic(p_branch, s_branch, gamma, k, lame, m, d).trace;
}

FourierCoefficientGrid::FourierCoefficientGrid(int d, double rho, double spacing, bool matrix)
    : d_(d), rho_(rho), spacing_(spacing), matrix_(matrix) {
  if (d != 2 && d != 3) throw Error(ErrorCode::DimensionMismatch, "dimension must be 2 or 3");
  if (!(rho >= 0.0) || !(spacing > 0.0)) throw Error(ErrorCode::DomainError, "need rho >= 0 and spacing > 0");
  max_index_ = static_cast<int>(std::floor(rho / spacing + 1e-12));
  const int J = max_index_;
  const int J2 = d == 3 ? J : 0;
  const double r2 = rho * rho * (1.0 + 1e-12);
  for (int a = -J; a <= J; ++a) {
    for (int b = -J; b <= J; ++b) {
      for (int c = -J2; c <= J2; ++c) {
        const double g2 = spacing * spacing * (double(a) * a + double(b) * b + double(c) * c);
        if (g2 <= r2) nodes_.push_back({a, b, c});
      }
    }
  }
  if (matrix) {
    matrices.assign(nodes_.size(), CMat3::Zero());
  } else {
    values.assign(nodes_.size(), cplx(0.0));
  }
}

FourierCoefficientGrid FourierCoefficientGrid::for_box(const SpatialGrid& grid, double rho, bool matrix) {
  return FourierCoefficientGrid(grid.dim(), rho, kPi / grid.box_length(), matrix);
}

Vec3 FourierCoefficientGrid::gamma(std::size_t i) const {
  const auto& j = nodes_[i];
  return Vec3(j[0], j[1], j[2]) * spacing_;
}

void hermitian_symmetrize(FourierCoefficientGrid& coeffs) {
  const std::size_t n = coeffs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = coeffs.mirror(i);
    if (j < i) continue;
    if (coeffs.matrix()) {
      const CMat3 a = 0.5 * (coeffs.matrices[i] + coeffs.matrices[j].conjugate());
      coeffs.matrices[i] = a;
      coeffs.matrices[j] = a.conjugate();
    } else {
      const cplx a = 0.5 * (coeffs.values[i] + std::conj(coeffs.values[j]));
      coeffs.values[i] = a;
      coeffs.values[j] = std::conj(a);
    }
  }
}

namespace {

using CMatR = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// sum_j e^{i gamma_j . x} a_j over the dense lattice box, on every output node.
std::vector<cplx> synthesize(const FourierCoefficientGrid& coeffs, const std::vector<cplx>& dense,
                             const SpatialGrid& out) {
  const int J = coeffs.max_index();
  const int M = 2 * J + 1;
  const int N = out.points_per_axis();
  CMatR T(M, N);
  for (int j = 0; j < M; ++j) {
    for (int i = 0; i < N; ++i) T(j, i) = std::polar(1.0, coeffs.spacing() * (j - J) * out.coordinate(i));
  }
  const CMatR Tt = T.transpose();
  std::vector<cplx> result(out.size());
  if (coeffs.dim() == 2) {
    Eigen::Map<const CMatR> A(dense.data(), M, M);
    Eigen::Map<CMatR> R(result.data(), N, N);
    R.noalias() = Tt * A * T;
    return result;
  }
  Eigen::Map<const CMatR> A(dense.data(), static_cast<Eigen::Index>(M) * M, M);
  const CMatR B = A * T;  // (j0, j1) x i2
  CMatR D(M, static_cast<Eigen::Index>(N) * N);
  for (int j0 = 0; j0 < M; ++j0) {
    const CMatR block = Tt * B.middleRows(static_cast<Eigen::Index>(j0) * M, M);  // i1 x i2
    D.row(j0) = Eigen::Map<const Eigen::Matrix<cplx, 1, Eigen::Dynamic>>(block.data(), block.size());
  }
  Eigen::Map<CMatR> R(result.data(), N, static_cast<Eigen::Index>(N) * N);
  R.noalias() = Tt * D;
  return result;
}

std::vector<cplx> densify(const FourierCoefficientGrid& coeffs, const std::function<cplx(std::size_t)>& value) {
  const int J = coeffs.max_index();
  const std::size_t M = static_cast<std::size_t>(2 * J + 1);
  const std::size_t depth = coeffs.dim() == 3 ? M : 1;
  std::vector<cplx> dense(M * M * depth, cplx(0.0));
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto& j = coeffs.index(i);
    std::size_t idx = static_cast<std::size_t>(j[0] + J) * M + static_cast<std::size_t>(j[1] + J);
    if (coeffs.dim() == 3) idx = idx * M + static_cast<std::size_t>(j[2] + J);
    dense[idx] = value(i);
  }
  return dense;
}

}  // namespace

ReconstructionResult inverse_fourier_cutoff(const FourierCoefficientGrid& coeffs, const SpatialGrid& output) {
  const int d = coeffs.dim();
  if (output.dim() != d) throw Error(ErrorCode::DimensionMismatch, "output grid dimension differs");
  const double weight = std::pow(coeffs.spacing(), d) / std::pow(2.0 * kPi, d);

  double amplitude = 0.0;
  double residue = 0.0;
  const auto track = [&](const std::vector<cplx>& v) {
    for (const auto& z : v) {
      amplitude = std::max(amplitude, std::abs(z));
      residue = std::max(residue, std::abs(z.imag()));
    }
  };

  ReconstructionResult res{StrengthField::scalar(output, std::vector<double>(output.size(), 0.0)), 0.0, 0.0, 0.0,
                           std::nullopt, std::nullopt};
  res.rho = coeffs.rho();
  if (!coeffs.matrix()) {
    auto field = synthesize(coeffs, densify(coeffs, [&](std::size_t i) { return coeffs.values[i] * weight; }), output);
    track(field);
    std::vector<double> real(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) real[i] = field[i].real();
    res.recovered = StrengthField::scalar(output, std::move(real));
  } else {
    std::vector<RMat3> mats(output.size(), RMat3::Zero());
    for (int r = 0; r < d; ++r) {
      for (int c = r; c < d; ++c) {
        auto field = synthesize(
            coeffs, densify(coeffs, [&](std::size_t i) { return coeffs.matrices[i](r, c) * weight; }), output);
        track(field);
        for (std::size_t i = 0; i < field.size(); ++i) {
          mats[i](r, c) = field[i].real();
          mats[i](c, r) = field[i].real();
        }
      }
    }
    res.recovered = StrengthField::matrix(output, std::move(mats));
  }
  res.imag_residue = residue;
  if (residue > 1e-10 * amplitude) {
    throw Error(ErrorCode::NonHermitianInput,
                "synthesized field has imaginary part " + std::to_string(residue / amplitude) + " of its amplitude");
  }
  return res;
}

void compare_to(ReconstructionResult& result, const StrengthField& planted) {
  const auto& grid = result.recovered.grid();
  if (!(planted.grid() == grid) || planted.is_matrix() != result.recovered.is_matrix()) {
    throw Error(ErrorCode::DimensionMismatch, "planted strength does not match the reconstruction grid");
  }
  double sup = 0.0;
  double l1 = 0.0;
  if (planted.is_matrix()) {
    const auto a = result.recovered.matrix_values();
    const auto b = planted.matrix_values();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double e = frobenius(RMat3(a[i] - b[i]), grid.dim());
      sup = std::max(sup, e);
      l1 += e;
    }
  } else {
    const auto a = result.recovered.scalar_values();
    const auto b = planted.scalar_values();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double e = std::abs(a[i] - b[i]);
      sup = std::max(sup, e);
      l1 += e;
    }
  }
  result.sup_error = sup;
  result.l1_error = l1 * grid.cell_volume();
}

void save_reconstruction(const std::filesystem::path& stem, const ReconstructionResult& result) {
  ContainerHeader h;
  h.kind = "reconstruction";
  h.grid = result.recovered.grid();
  const int d = h.grid.dim();
  std::vector<double> data;
  if (result.recovered.is_matrix()) {
    h.values_per_node = d * d;
    h.tags["rank"] = "matrix";
    for (const auto& a : result.recovered.matrix_values())
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) data.push_back(a(r, c));
  } else {
    h.tags["rank"] = "scalar";
    const auto v = result.recovered.scalar_values();
    data.assign(v.begin(), v.end());
  }
  h.numbers["rho"] = result.rho;
  h.numbers["k"] = result.k;
  h.numbers["imag_residue"] = result.imag_residue;
  if (result.sup_error) h.numbers["sup_error"] = *result.sup_error;
  if (result.l1_error) h.numbers["l1_error"] = *result.l1_error;
  write_container(stem, h, data);
}

std::vector<ProbeRow> stability_probe(const CheckedSource& planted, std::span<const double> ks, Pathway pathway,
                                      const std::function<SupStatistic(double)>& sup_at) {
  const auto& model = planted.model();
  const double s = planted.spec().s;
  const double m = planted.spec().m;
  if (!(s > model.smoothness_floor())) {
    throw Error(ErrorCode::SmoothnessTooLow, "s = " + std::to_string(planted.spec().s) +
                                                 " does not exceed the stability floor " +
                                                 std::to_string(model.smoothness_floor()));
  }
  const int d = model.dim();
  const int n = model.order();
  const double b2 = std::norm(beta(d));
  const auto& sigma = planted.strength();

  double strength_sup = 0.0;
  if (model.kind() == ModelKind::Elastic) {
    for (double t : sigma.trace_values()) strength_sup = std::max(strength_sup, std::abs(t));
  } else {
    strength_sup = sigma.sup_norm();
  }
  const double norm_l1 = bound_norm(model, sigma);

  std::vector<ProbeRow> rows;
  for (double k : ks) {
    if (!(k > 1.0)) throw Error(ErrorCode::DomainError, "probe wavenumbers must exceed 1");
    ProbeRow row;
    row.k = k;
    row.pathway = pathway;
    row.M = sup_at(k).M;
    row.strength_sup = strength_sup;
    row.l1_lhs = norm_l1;
    row.rho_theory = std::pow(k, 1.0 / s);
    switch (model.kind()) {
      case ModelKind::Polyharmonic:
        row.k_power = std::pow(k, d / s + m + 4 * n - d - 1);
        row.l1_rhs = 2.0 * n * n / b2 * std::pow(k, 4 * n + m - d - 1) * row.M;
        break;
      case ModelKind::Electromagnetic:
        row.k_power = std::pow(k, 3.0 / s + m - 2.0);
        row.l1_rhs = 2.0 / b2 * std::pow(k, m - 2.0) * row.M;
        break;
      case ModelKind::Elastic: {
        const ElasticWavenumbers w(k, model.lame());
        row.k_power = std::pow(k, d / s + m - d + 3);
        row.l1_rhs = 2.0 * d / (b2 * std::pow(w.c_p, d + 2 - m)) * std::pow(k, m - d + 3) * row.M;
        break;
      }
    }
    row.ratio = row.M > 0.0 ? strength_sup / (row.k_power * row.M) : 0.0;
    row.l1_holds = row.l1_lhs <= row.l1_rhs;
    row.l1_asserted = pathway == Pathway::Analytic && k >= 8.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stochinv
