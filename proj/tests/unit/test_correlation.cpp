#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stochinv/correlation.hpp"
#include "stochinv/sampler.hpp"

using namespace stochinv;
using namespace std::complex_literals;

namespace {

const double kPiD = std::acos(-1.0);

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::DomainError;
}

FarFieldSample scalar_sample(const Vec3& dir, cplx v, double k = 4.0) {
  FarFieldSample s;
  s.direction = dir;
  s.value[0] = v;
  s.k = k;
  return s;
}

RMat3 weight3() {
  RMat3 w;
  w << 1.0, 0.2, 0.1, 0.2, 0.7, -0.15, 0.1, -0.15, 0.5;
  return w;
}

}  // namespace

TEST_CASE("accumulator basics") {
  CorrelationAccumulator acc(false, 2);
  const Vec3 x(1, 0, 0), y(0, 1, 0);
  CHECK(code_of([&] { (void)acc.record(x, y, 4.0, Channel::Scalar); }) == ErrorCode::EnsembleTooSmall);
  acc.add(CVec3::Zero(), CVec3::Zero());
  CHECK(code_of([&] { (void)acc.record(x, y, 4.0, Channel::Scalar); }) == ErrorCode::EnsembleTooSmall);
  for (int i = 0; i < 9; ++i) acc.add(CVec3::Zero(), CVec3::Zero());
  const auto rec = acc.record(x, y, 4.0, Channel::Scalar);
  CHECK(rec.scalar() == cplx(0.0));
  CHECK(rec.stderr == 0.0);
  CHECK(rec.n_samples == 10);
  CHECK(rec.pathway == Pathway::MonteCarlo);

  // A constant product has the product as its mean and no spread.
  CorrelationAccumulator c(true, 3);
  const CVec3 u(1.0 + 2i, -0.5, 3i);
  const CVec3 v(0.25, 1i, -1.0);
  for (int i = 0; i < 50; ++i) c.add(u, v);
  const auto r = c.record(x, y, 4.0, Channel::Electric);
  CHECK((r.value - u * v.transpose()).norm() <= 1e-14);
  CHECK(r.stderr <= 1e-14);
  CHECK(code_of([&] { c.merge(CorrelationAccumulator(false, 3)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("accumulator merge matches serial accumulation") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g;
  std::vector<std::pair<CVec3, CVec3>> data;
  for (int i = 0; i < 1000; ++i) {
    CVec3 a, b;
    for (int c = 0; c < 3; ++c) {
      a[c] = cplx(g(gen), g(gen)) + 2.0;
      b[c] = cplx(g(gen), g(gen));
    }
    data.emplace_back(a, b);
  }
  CorrelationAccumulator serial(true, 3);
  for (const auto& [a, b] : data) serial.add(a, b);
  CorrelationAccumulator merged(true, 3);
  for (std::size_t lo = 0; lo < data.size(); lo += 137) {
    CorrelationAccumulator part(true, 3);
    for (std::size_t i = lo; i < std::min(data.size(), lo + 137); ++i) part.add(data[i].first, data[i].second);
    merged.merge(part);
  }
  merged.merge(CorrelationAccumulator(true, 3));
  const Vec3 x(1, 0, 0);
  const auto rs = serial.record(x, x, 2.0, Channel::Electric);
  const auto rm = merged.record(x, x, 2.0, Channel::Electric);
  CHECK(rm.n_samples == 1000);
  CHECK((rs.value - rm.value).norm() <= 1e-13 * rs.value.norm());
  CHECK((rs.entry_stderr - rm.entry_stderr).norm() <= 1e-12 * rs.entry_stderr.norm());

  // Mean and stderr against a direct two-pass computation on one entry.
  cplx mean = 0.0;
  for (const auto& [a, b] : data) mean += a[1] * b[2];
  mean /= 1000.0;
  double var = 0.0;
  for (const auto& [a, b] : data) var += std::norm(a[1] * b[2] - mean);
  var /= 999.0;
  CHECK(std::abs(rs.value(1, 2) - mean) <= 1e-13 * std::abs(mean));
  CHECK(rs.entry_stderr(1, 2) == doctest::Approx(std::sqrt(var / 1000.0)).epsilon(1e-10));
}

TEST_CASE("mc_correlation over paired ensembles") {
  std::vector<FarFieldSample> xs, ys;
  const Vec3 x(1, 0, 0), y(0, 1, 0);
  cplx expect = 0.0;
  for (int i = 0; i < 20; ++i) {
    const cplx a(std::cos(i), std::sin(2.0 * i));
    const cplx b(0.5 * i, -1.0);
    xs.push_back(scalar_sample(x, a));
    ys.push_back(scalar_sample(y, b));
    expect += a * b;
  }
  const auto rec = mc_correlation(xs, ys);
  CHECK(std::abs(rec.scalar() - expect / 20.0) <= 1e-14);
  CHECK(rec.x == x);
  CHECK(rec.y == y);
  CHECK(rec.k == 4.0);
  CHECK(!rec.matrix);

  std::vector<FarFieldSample> short_y(ys.begin(), ys.begin() + 5);
  CHECK(code_of([&] { mc_correlation(xs, short_y); }) == ErrorCode::DimensionMismatch);
  std::vector<FarFieldSample> one(xs.begin(), xs.begin() + 1);
  CHECK(code_of([&] { mc_correlation(one, one); }) == ErrorCode::EnsembleTooSmall);
  auto mixed = ys;
  mixed[3].k = 5.0;
  CHECK(code_of([&] { mc_correlation(xs, mixed); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("stderr shrinks like n^-1/2") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> g;
  std::vector<double> ns, errs;
  for (int n : {256, 1024, 4096}) {
    CorrelationAccumulator acc(false, 2);
    for (int i = 0; i < n; ++i) acc.add(CVec3(cplx(g(gen), g(gen)), 0, 0), CVec3(cplx(g(gen), 0.0), 0, 0));
    ns.push_back(std::log(n));
    errs.push_back(std::log(acc.record(Vec3::UnitX(), Vec3::UnitX(), 2.0, Channel::Scalar).stderr));
  }
  const double slope = (errs[2] - errs[0]) / (ns[2] - ns[0]);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("analytic polyharmonic correlation") {
  const double a = 0.15;
  const GaussianStrength g(2, {GaussianBump{Vec3::Zero(), a, 1.0, RMat3::Identity()}}, false);
  const auto spec = closed_form_spectrum(g);
  const double k = 8.0;
  const Vec3 x(1, 0, 0), y(0, 1, 0);
  // d + 1 - 4n - m = -3 for d = 2, n = 1, m = 2; |gamma|^2 = 2 k^2.
  const cplx expect = beta(2) * beta(2) * std::pow(k, -3.0) * 2.0 * kPiD * a * a * std::exp(-a * a * k * k);
  const auto rec = analytic_correlation_poly(spec, k, 1, 2, 2.0, x, y);
  CHECK(std::abs(rec.scalar() - expect) <= 1e-14 * std::abs(expect));
  CHECK(rec.pathway == Pathway::Analytic);
  CHECK(rec.stderr == 0.0);

  // Antipodal pairs see the total mass.
  const auto anti = analytic_correlation_poly(spec, k, 2, 2, 2.0, x, -x);
  const cplx at0 = beta(2) * beta(2) / 4.0 * std::pow(k, 3.0 - 8.0 - 2.0) * 2.0 * kPiD * a * a;
  CHECK(std::abs(anti.scalar() - at0) <= 1e-14 * std::abs(at0));

  const ScalarSpectrum zero = [](const Vec3&) { return cplx(0.0); };
  CHECK(analytic_correlation_poly(zero, k, 1, 2, 2.0, x, y).scalar() == cplx(0.0));
  CHECK(code_of([&] { analytic_correlation_poly(spec, 1.0, 1, 2, 2.0, x, y); }) == ErrorCode::DomainError);
}

TEST_CASE("analytic correlation symmetries") {
  const GaussianStrength g(2, {GaussianBump{Vec3(0.2, -0.1, 0), 0.15, 1.0, RMat3::Identity()},
                               GaussianBump{Vec3(-0.3, 0.3, 0), 0.1, 0.5, RMat3::Identity()}},
                           false);
  const auto spec = closed_form_spectrum(g);
  const auto dirs = direction_set(2, 16);
  const cplx b2 = beta(2) * beta(2);
  for (const auto& x : dirs) {
    for (const auto& y : dirs) {
      const cplx f = analytic_correlation_poly(spec, 6.0, 1, 2, 2.0, x, y).scalar();
      const cplx fr = analytic_correlation_poly(spec, 6.0, 1, 2, 2.0, -x, -y).scalar();
      const cplx ft = analytic_correlation_poly(spec, 6.0, 1, 2, 2.0, y, x).scalar();
      REQUIRE(std::abs(fr / b2 - std::conj(f / b2)) <= 1e-14 * std::abs(f));
      REQUIRE(ft == f);
    }
  }
}

TEST_CASE("analytic electromagnetic correlation") {
  const Vec3 x = Vec3(1, 2, 2) / 3.0;
  const Vec3 y = Vec3(0, 0.6, -0.8);
  const double k = 4.0, m = 3.0;

  const GaussianStrength iso(3, {GaussianBump{Vec3::Zero(), 0.15, 1.0, RMat3::Identity()}}, true);
  const auto ri = analytic_correlation_em(closed_form_matrix_spectrum(iso), k, m, x, y);
  CHECK(ri.matrix);
  CHECK(ri.channel == Channel::Electric);
  const cplx d0 = ri.value(0, 0);
  CHECK((ri.value - d0 * CMat3::Identity()).norm() <= 1e-15 * std::abs(d0));
  const double b = 1.0 / (4 * kPiD);
  const cplx expect = -k * k * b * b * std::pow(k, -m) * iso.transform(k * (x + y));
  CHECK(std::abs(d0 - expect) <= 1e-14 * std::abs(expect));

  const GaussianStrength g(3, {GaussianBump{Vec3(0.1, 0.0, -0.1), 0.15, 1.0, weight3()}}, true);
  const auto rc = analytic_correlation_em(closed_form_matrix_spectrum(g), k, m, x, y);
  CHECK((rc.value - rc.value.transpose()).norm() <= 1e-15 * rc.value.norm());

  // Closed form against grid quadrature of the rasterized strength.
  const SpatialGrid grid(3, 64);
  const auto rq = analytic_correlation_em(quadrature_matrix_spectrum(g.rasterize(grid)), k, m, x, y);
  CHECK((rq.value - rc.value).norm() <= 1e-8 * rc.value.norm());
}

TEST_CASE("analytic elastic correlation") {
  const LameParameters lame{2.0, 1.0};
  RMat3 w = RMat3::Zero();
  w << 1.0, 0.3, 0, 0.3, 0.6, 0, 0, 0, 0;
  const GaussianStrength g(2, {GaussianBump{Vec3(0.1, 0.05, 0), 0.15, 1.0, w}}, true);
  const auto spec = closed_form_matrix_spectrum(g);
  const Vec3 x(0.6, 0.8, 0), y(-1, 0, 0);
  const double k = 10.0, m = 1.5;

  const auto p = analytic_correlation_elastic(spec, k, lame, 2, m, x, y, Channel::Compressional);
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(p.value.topLeftCorner<2, 2>().eval());
  CHECK(svd.singularValues()[1] <= 1e-14 * svd.singularValues()[0]);

  const ElasticWavenumbers kw(k, lame);
  const cplx b2 = beta(2) * beta(2);
  const auto pa = analytic_correlation_elastic(spec, k, lame, 2, m, x, -x, Channel::Compressional);
  const cplx proj = x.dot(g.matrix_transform(Vec3::Zero()).real() * x);
  const double expect = std::abs(b2 * std::pow(kw.c_p, 4 - m) * std::pow(k, -1 - m) * proj);
  CHECK(pa.norm() == doctest::Approx(expect).epsilon(1e-13));

  // Shear records are annihilated by x on the left and y on the right.
  const auto s = analytic_correlation_elastic(spec, k, lame, 2, m, x, y, Channel::Shear);
  CHECK((x.cast<cplx>().transpose() * s.value).norm() <= 1e-15 * s.value.norm());
  CHECK((s.value * y.cast<cplx>()).norm() <= 1e-15 * s.value.norm());
  CHECK(s.channel == Channel::Shear);

  CHECK(code_of([&] { analytic_correlation_elastic(spec, k, lame, 2, m, x, y, Channel::Scalar); }) ==
        ErrorCode::DomainError);
}

TEST_CASE("direction pairs") {
  const auto dirs = direction_set(2, 8);
  const auto all = direction_pairs(dirs);
  CHECK(all.size() == 8 * 8 + 8);
  for (std::size_t i = 64; i < all.size(); ++i) CHECK((all[i].first + all[i].second).norm() == 0.0);
  const auto anti = antipodal_pairs(dirs);
  CHECK(anti.size() == 8);
  CHECK(anti[3].second == -dirs[3]);
}

TEST_CASE("sup statistic") {
  CHECK(code_of([] { sup_statistic(std::span<const CorrelationRecord>{}, ModelKind::Polyharmonic, 4); }) ==
        ErrorCode::EmptyInput);

  CorrelationRecord r;
  r.k = 3.0;
  r.value(0, 0) = cplx(3.0, 4.0);
  r.stderr = 0.1;
  const std::vector<CorrelationRecord> one{r};
  const auto s = sup_statistic(one, ModelKind::Polyharmonic, 7);
  CHECK(s.M == 5.0);
  CHECK(s.stderr == 0.1);
  CHECK(s.pairs == 1);
  CHECK(s.resolution == 7);

  auto r2 = r;
  r2.k = 4.0;
  const std::vector<CorrelationRecord> mixed{r, r2};
  CHECK(code_of([&] { sup_statistic(mixed, ModelKind::Polyharmonic, 2); }) == ErrorCode::DomainError);

  // For non-negative sigma the maximum sits on the antipodal pairs.
  const GaussianStrength g(2, {GaussianBump{Vec3(0.3, 0.1, 0), 0.12, 1.0, RMat3::Identity()}}, false);
  const auto spec = closed_form_spectrum(g);
  double coarse = 0.0;
  for (int res : {128, 512}) {
    const auto dirs = direction_set(2, res);
    std::vector<CorrelationRecord> recs;
    for (const auto& [x, y] : direction_pairs(dirs)) recs.push_back(analytic_correlation_poly(spec, 8.0, 1, 2, 2.0, x, y));
    const double M = sup_statistic(recs, ModelKind::Polyharmonic, res).M;
    const double expect = std::norm(beta(2)) * std::pow(8.0, -3.0) * g.transform(Vec3::Zero()).real();
    CHECK(M == doctest::Approx(expect).epsilon(1e-14));
    if (res == 512) CHECK(M >= coarse);
    coarse = M;
  }
}

TEST_CASE("bound norms") {
  const SpatialGrid g2(2, 32);
  const auto scalar = gaussian_bump_strength(g2, Vec3::Zero(), 0.15, 2.0);
  CHECK(bound_norm(WaveModel::polyharmonic(2, 1), scalar) == scalar.l1_norm());

  const SpatialGrid g3(3, 32);
  const GaussianStrength g(3, {GaussianBump{Vec3::Zero(), 0.15, 1.0, weight3()}}, true);
  const auto sigma = g.rasterize(g3);
  const double em = bound_norm(WaveModel::electromagnetic(), sigma);
  CHECK(em == doctest::Approx(frobenius(g.matrix_transform(Vec3::Zero()), 3)).epsilon(1e-8));
  const double el = bound_norm(WaveModel::elastic(3, 2.0, 1.0), sigma);
  CHECK(el == doctest::Approx(weight3().trace() * g.transform(Vec3::Zero()).real() / 1.0).epsilon(1e-8));
}

TEST_CASE("sandwich check") {
  const auto model = WaveModel::polyharmonic(2, 1);
  const double k = 16.0, m = 2.0;
  const double norm = 0.7;
  SupStatistic M;
  M.k = k;
  M.M = std::norm(beta(2)) * std::pow(k, -3.0) * norm;
  auto rep = sandwich_check(M, norm, model, m, 0.0);
  CHECK(rep.within);
  CHECK(rep.lower == doctest::Approx(M.M).epsilon(1e-15));
  REQUIRE(rep.upper);
  CHECK(*rep.upper == doctest::Approx(M.M).epsilon(1e-15));

  auto high = M;
  high.M *= 1.01;
  CHECK(!sandwich_check(high, norm, model, m, 0.0).within);
  CHECK(sandwich_check(high, norm, model, m, 0.02 * k).within);
  high.stderr = 0.01 * M.M;
  CHECK(sandwich_check(high, norm, model, m, 0.0, 4 * high.stderr).within);

  SupStatistic zero;
  zero.k = k;
  CHECK(sandwich_check(zero, 0.0, model, m, 0.0).within);
  CHECK(sandwich_check(zero, 0.0, WaveModel::electromagnetic(), 3.0, 0.0).within);
  CHECK(sandwich_check(zero, 0.0, WaveModel::elastic(2, 2, 1), 1.5, 0.0).within);
  CHECK(!sandwich_check(zero, 0.0, WaveModel::elastic(2, 2, 1), 1.5, 0.0).upper);

  zero.k = 1.0;
  CHECK(code_of([&] { sandwich_check(zero, 0.0, model, m, 0.0); }) == ErrorCode::DomainError);
}

TEST_CASE("pathway names") {
  for (Pathway p : {Pathway::Analytic, Pathway::MonteCarlo}) CHECK(pathway_from_string(to_string(p)) == p);
  CHECK(code_of([] { pathway_from_string("quadrature"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("small Monte Carlo ensemble agrees with the accumulator on the same far fields") {
  const SpatialGrid grid(2, 32);
  const auto src = validate_source(WaveModel::polyharmonic(2, 1), SourceSpec{2.0, 4, gaussian_bump_strength(grid, Vec3::Zero(), 0.15, 1.0)});
  const std::vector<Vec3> dirs{Vec3(1, 0, 0), Vec3(-1, 0, 0)};
  std::vector<FarFieldSample> xs, ys;
  CorrelationAccumulator acc(false, 2);
  for (std::uint64_t s = 1; s <= 64; ++s) {
    const auto u = poly_farfield(sample(src, s), 8.0, 1, dirs);
    xs.push_back(u[0]);
    ys.push_back(u[1]);
    acc.add(u[0].value, u[1].value);
  }
  const auto a = mc_correlation(xs, ys);
  const auto b = acc.record(dirs[0], dirs[1], 8.0, Channel::Scalar);
  CHECK(a.value == b.value);
  CHECK(a.stderr == b.stderr);
  CHECK(a.stderr > 0.0);
}
