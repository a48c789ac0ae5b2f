#include "stochinv/correlation.hpp"

#include <cmath>
#include <limits>

namespace stochinv {

std::string_view to_string(Pathway p) noexcept { return p == Pathway::MonteCarlo ? "montecarlo" : "analytic"; }

Pathway pathway_from_string(std::string_view name) {
  if (name == "montecarlo") return Pathway::MonteCarlo;
  if (name == "analytic") return Pathway::Analytic;
  throw Error(ErrorCode::ConfigInvalid, "unknown pathway '" + std::string(name) + "'");
}

double CorrelationRecord::norm() const {
  return matrix ? frobenius(value, dim) : std::abs(value(0, 0));
}

CorrelationAccumulator::CorrelationAccumulator(bool matrix, int dim) : matrix_(matrix), dim_(dim) {}

void CorrelationAccumulator::add(const CVec3& ux, const CVec3& uy) {
  const CMat3 p = matrix_ ? CMat3(ux * uy.transpose()) : CMat3(CMat3::Constant(0.0));
  const cplx scalar = ux[0] * uy[0];
  ++n_;
  const double inv = 1.0 / static_cast<double>(n_);
  const int rows = matrix_ ? dim_ : 1;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < rows; ++c) {
      const cplx v = matrix_ ? p(r, c) : scalar;
      const double dre = v.real() - mean_re_(r, c);
      const double dim = v.imag() - mean_im_(r, c);
      mean_re_(r, c) += dre * inv;
      mean_im_(r, c) += dim * inv;
      m2_re_(r, c) += dre * (v.real() - mean_re_(r, c));
      m2_im_(r, c) += dim * (v.imag() - mean_im_(r, c));
    }
  }
}

void CorrelationAccumulator::merge(const CorrelationAccumulator& other) {
  if (other.matrix_ != matrix_ || other.dim_ != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "cannot merge accumulators of different shapes");
  }
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const RMat3 dre = other.mean_re_ - mean_re_;
  const RMat3 dim = other.mean_im_ - mean_im_;
  mean_re_ += dre * (nb / n);
  mean_im_ += dim * (nb / n);
  m2_re_ += other.m2_re_ + dre.cwiseProduct(dre) * (na * nb / n);
  m2_im_ += other.m2_im_ + dim.cwiseProduct(dim) * (na * nb / n);
  n_ += other.n_;
}

CorrelationRecord CorrelationAccumulator::record(const Vec3& x, const Vec3& y, double k, Channel channel) const {
  if (n_ < 2) throw Error(ErrorCode::EnsembleTooSmall, "need at least two realizations");
  CorrelationRecord rec;
  rec.x = x;
  rec.y = y;
  rec.k = k;
  rec.dim = dim_;
  rec.matrix = matrix_;
  rec.channel = channel;
  rec.n_samples = n_;
  rec.pathway = Pathway::MonteCarlo;
  const double n = static_cast<double>(n_);
  const int rows = matrix_ ? dim_ : 1;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < rows; ++c) {
      rec.value(r, c) = cplx(mean_re_(r, c), mean_im_(r, c));
      const double var = (m2_re_(r, c) + m2_im_(r, c)) / (n - 1.0);
      rec.entry_stderr(r, c) = std::sqrt(std::max(var, 0.0) / n);
    }
  }
  rec.stderr = rec.entry_stderr.maxCoeff();
  return rec;
}

CorrelationRecord mc_correlation(std::span<const FarFieldSample> at_x, std::span<const FarFieldSample> at_y) {
  if (at_x.size() != at_y.size()) throw Error(ErrorCode::DimensionMismatch, "ensembles differ in size");
  if (at_x.size() < 2) throw Error(ErrorCode::EnsembleTooSmall, "need at least two realizations");
  const auto& first = at_x.front();
  const bool matrix = first.channel != Channel::Scalar;
  const int dim = first.dim;
  CorrelationAccumulator acc(matrix, dim);
  for (std::size_t i = 0; i < at_x.size(); ++i) {
    if (at_x[i].k != first.k || at_y[i].k != first.k || at_x[i].channel != first.channel ||
        at_y[i].channel != first.channel || at_x[i].dim != first.dim || at_y[i].dim != first.dim) {
      throw Error(ErrorCode::DimensionMismatch, "ensemble mixes wavenumbers or channels");
    }
    acc.add(at_x[i].value, at_y[i].value);
  }
  return acc.record(first.direction, at_y.front().direction, first.k, first.channel);
}

ScalarSpectrum closed_form_spectrum(const GaussianStrength& sigma) {
  return [sigma](const Vec3& g) { return sigma.transform(g); };
}

MatrixSpectrum closed_form_matrix_spectrum(const GaussianStrength& sigma) {
  return [sigma](const Vec3& g) { return sigma.matrix_transform(g); };
}

ScalarSpectrum quadrature_spectrum(const StrengthField& sigma) {
  return [sigma](const Vec3& g) { return strength_transform(sigma, g); };
}

MatrixSpectrum quadrature_matrix_spectrum(const StrengthField& sigma) {
  return [sigma](const Vec3& g) { return strength_matrix_transform(sigma, g); };
}

namespace {

CorrelationRecord analytic_record(const Vec3& x, const Vec3& y, double k, int dim, bool matrix, Channel ch) {
  CorrelationRecord rec;
  rec.x = x;
  rec.y = y;
  rec.k = k;
  rec.dim = dim;
  rec.matrix = matrix;
  rec.channel = ch;
  rec.pathway = Pathway::Analytic;
  return rec;
}

void check_k(double k) {
  if (!(k > 1.0)) throw Error(ErrorCode::DomainError, "analytic correlations need k > 1");
}

}  // namespace

CorrelationRecord analytic_correlation_poly(const ScalarSpectrum& sigma_hat, double k, int n, int d, double m,
                                            const Vec3& x, const Vec3& y) {
  check_k(k);
  const cplx b = beta(d);
  auto rec = analytic_record(x, y, k, d, false, Channel::Scalar);
  rec.value(0, 0) = b * b / static_cast<double>(n * n) * std::pow(k, d + 1 - 4 * n - m) * sigma_hat(k * (x + y));
  return rec;
}

CorrelationRecord analytic_correlation_em(const MatrixSpectrum& sigma_hat, double k, double m, const Vec3& x,
                                          const Vec3& y) {
  check_k(k);
  const double b = beta(3).real();
  auto rec = analytic_record(x, y, k, 3, true, Channel::Electric);
  rec.value = -(k * k * b * b * std::pow(k, -m)) * sigma_hat(k * (x + y));
  return rec;
}

CorrelationRecord analytic_correlation_elastic(const MatrixSpectrum& sigma_hat, double k, const LameParameters& lame,
                                               int d, double m, const Vec3& x, const Vec3& y, Channel branch) {
  check_k(k);
  const ElasticWavenumbers w(k, lame);
  const cplx b2 = beta(d) * beta(d);
  const RMat3 px = x * x.transpose();
  const RMat3 py = y * y.transpose();
  auto rec = analytic_record(x, y, k, d, true, branch);
  if (branch == Channel::Compressional) {
    const cplx pre = b2 * std::pow(w.c_p, d + 2 - m) * std::pow(k, d - 3 - m);
    rec.value = pre * (px.cast<cplx>() * sigma_hat(w.k_p * (x + y)) * py.cast<cplx>());
  } else if (branch == Channel::Shear) {
    const RMat3 eye = identity(d);
    const cplx pre = b2 * std::pow(w.c_s, d + 2 - m) * std::pow(k, d - 3 - m);
    rec.value = pre * ((eye - px).cast<cplx>() * sigma_hat(w.k_s * (x + y)) * (eye - py).cast<cplx>());
  } else {
    throw Error(ErrorCode::DomainError, "elastic branch must be compressional or shear");
  }
  return rec;
}

std::vector<std::pair<Vec3, Vec3>> direction_pairs(std::span<const Vec3> dirs) {
  std::vector<std::pair<Vec3, Vec3>> out;
  out.reserve(dirs.size() * (dirs.size() + 1));
  for (const auto& a : dirs)
    for (const auto& b : dirs) out.emplace_back(a, b);
  for (const auto& a : dirs) out.emplace_back(a, -a);
  return out;
}

std::vector<std::pair<Vec3, Vec3>> antipodal_pairs(std::span<const Vec3> dirs) {
  std::vector<std::pair<Vec3, Vec3>> out;
  out.reserve(dirs.size());
  for (const auto& a : dirs) out.emplace_back(a, -a);
  return out;
}

SupStatistic sup_statistic(std::span<const CorrelationRecord> records, ModelKind model, int resolution) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no correlation records");
  SupStatistic s;
  s.k = records.front().k;
  s.model = model;
  s.resolution = resolution;
  s.pairs = records.size();
  s.M = -1.0;
  for (const auto& r : records) {
    if (r.k != s.k) throw Error(ErrorCode::DomainError, "records mix wavenumbers");
    const double v = r.norm();
    if (v > s.M) {
      s.M = v;
      s.stderr = r.stderr;
    }
  }
  return s;
}

double bound_norm(const WaveModel& model, const StrengthField& sigma) {
  if (model.kind() == ModelKind::Electromagnetic) {
    return frobenius(strength_matrix_transform(sigma, Vec3::Zero()), 3);
  }
  return sigma.l1_norm();
}

SandwichReport sandwich_check(const SupStatistic& M, double strength_norm, const WaveModel& model, double m, double C1,
                              double slack) {
  if (!(M.k > 1.0)) throw Error(ErrorCode::DomainError, "sandwich bounds need k > 1");
  const int d = model.dim();
  const double k = M.k;
  const double b2 = std::norm(beta(d));
  SandwichReport rep;
  rep.M = M.M;
  rep.slack = slack;
  switch (model.kind()) {
    case ModelKind::Polyharmonic: {
      const int n = model.order();
      const double pre = b2 / (n * n) * std::pow(k, d + 1 - 4 * n - m);
      rep.lower = pre * (strength_norm - C1 / k);
      rep.upper = pre * (strength_norm + C1 / k);
      break;
    }
    case ModelKind::Electromagnetic:
      rep.lower = b2 * std::pow(k, 2.0 - m) * (strength_norm - C1 / k);
      break;
    case ModelKind::Elastic: {
      const ElasticWavenumbers w(k, model.lame());
      rep.lower = b2 * std::pow(w.c_p, d + 2 - m) / d * std::pow(k, d - 3 - m) * strength_norm -
                  C1 * b2 * std::pow(w.c_p, d + 1 - m) * std::pow(k, d - 4 - m);
      break;
    }
  }
  const double tol = 1e-12 * std::max({std::abs(rep.lower), std::abs(rep.upper.value_or(0.0)), std::abs(M.M)});
  rep.within = M.M >= rep.lower - slack - tol && (!rep.upper || M.M <= *rep.upper + slack + tol);
  return rep;
}

SandwichReport sandwich_check(const SupStatistic& M, const StrengthField& sigma, const WaveModel& model, double m,
                              double C1, double slack) {
  return sandwich_check(M, bound_norm(model, sigma), model, m, C1, slack);
}

}  // namespace stochinv
