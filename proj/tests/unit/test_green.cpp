#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stochinv/bessel.hpp"
#include "stochinv/farfield.hpp"
#include "stochinv/green.hpp"

using namespace stochinv;
using namespace std::complex_literals;

namespace {

const double kPiD = std::acos(-1.0);

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

FieldRealization gaussian_field(const SpatialGrid& grid, double a, const Vec3& c = Vec3::Zero()) {
  auto f = FieldRealization::zeros(grid, 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 x = grid.node(i);
    if (x.norm() < 1.0) f.values[i] = std::exp(-(x - c).squaredNorm() / (2 * a * a));
  }
  return f;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::DomainError;
}

}  // namespace

TEST_CASE("hankel0 at 1") {
  const cplx h = hankel0(1.0);
  CHECK(h.real() == doctest::Approx(0.7651977).epsilon(1e-7));
  CHECK(h.imag() == doctest::Approx(0.0882570).epsilon(1e-6));
  CHECK(rel(h, oracle::hankel0(1.0)) <= 1e-12);
}

TEST_CASE("hankel0 large-argument modulus") {
  const double x = 100.0;
  CHECK(std::abs(std::abs(hankel0(x)) / std::sqrt(2.0 / (kPiD * x)) - 1.0) <= 1e-3);
}

TEST_CASE("hankel0 decays along the imaginary axis") {
  CHECK(std::abs(hankel0(10i)) < std::abs(hankel0(5i)));
  CHECK(std::abs(hankel0(20i)) < std::abs(hankel0(10i)));
}

TEST_CASE("hankel0 matches the multiprecision series") {
  std::vector<cplx> zs;
  for (double r : {0.01, 0.3, 1.0, 2.5, 5.0, 7.9, 8.0, 8.1, 12.0, 25.0, 40.0}) {
    for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) zs.push_back(std::polar(r, t * kPiD / 2));
    zs.push_back(std::polar(r, 0.75 * kPiD));
    zs.push_back(std::polar(r, kPiD * 0.999));
  }
  for (const cplx z : zs) {
    CAPTURE(z);
    CHECK(rel(hankel0(z), oracle::hankel0(z)) <= 1e-7);
  }
}

TEST_CASE("hankel domain errors") {
  CHECK(code_of([] { hankel0(0.0); }) == ErrorCode::DomainError);
  CHECK(code_of([] { hankel0(cplx(1.0, -0.1)); }) == ErrorCode::DomainError);
  CHECK(code_of([] { hankel1(cplx(3.0, -1e-3)); }) == ErrorCode::DomainError);
}

TEST_CASE("bessel wronskian") {
  // J0 Y0' - J0' Y0 = J1 Y0 - J0 Y1 = 2 / (pi x)
  for (double x = 0.25; x < 40.0; x *= 1.37) {
    double j0, j1, y0, y1;
    if (x <= kHankelSwitch) {
      j0 = bessel_j0_series(x).real();
      j1 = bessel_j1_series(x).real();
      y0 = bessel_y0_series(x).real();
      y1 = bessel_y1_series(x).real();
    } else {
      j0 = hankel0(x).real();
      y0 = hankel0(x).imag();
      j1 = hankel1(x).real();
      y1 = hankel1(x).imag();
    }
    CAPTURE(x);
    CHECK((j1 * y0 - j0 * y1) == doctest::Approx(2.0 / (kPiD * x)).epsilon(1e-6));
  }
}

TEST_CASE("series and asymptotic branches agree at the switch") {
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    const cplx z = std::polar(kHankelSwitch, t * kPiD / 2);
    const cplx series = bessel_j0_series(z) + 1i * bessel_y0_series(z);
    CHECK(rel(hankel_asymptotic(0, z), series) <= 1e-7);
  }
}

TEST_CASE("helmholtz green's function values") {
  const Vec3 x(0.3, -0.2, 0.5);
  const Vec3 y = x + Vec3(0, 0, 1);
  const cplx g = helmholtz_green(x, y, 1.0, 3);
  CHECK(g.real() == doctest::Approx(0.04300).epsilon(1e-3));
  CHECK(g.imag() == doctest::Approx(0.06697).epsilon(1e-3));
  CHECK(rel(g, std::exp(1i) / (4 * kPiD)) <= 1e-15);

  const cplx gi = helmholtz_green(x, y, 1i, 3);
  CHECK(std::abs(gi.imag()) <= 1e-18);
  CHECK(gi.real() == doctest::Approx(0.029276).epsilon(1e-4));

  CHECK(helmholtz_green(x, y, 2.5, 3) == helmholtz_green(y, x, 2.5, 3));
  CHECK(helmholtz_green(x, y, 2.5, 2) == helmholtz_green(y, x, 2.5, 2));
  CHECK(rel(helmholtz_green(x, y, 2.0, 2), 0.25i * hankel0(2.0)) <= 1e-15);
  // Kernel conjugation under k -> -k (3D, real k).
  CHECK(std::abs(helmholtz_green(x, y, -1.7, 3) - std::conj(helmholtz_green(x, y, 1.7, 3))) <= 1e-17);

  CHECK(code_of([&] { helmholtz_green(x, x, 1.0, 3); }) == ErrorCode::CoincidentPoints);
  CHECK(code_of([&] { polyharmonic_green(x, x, 1.0, 2, 2); }) == ErrorCode::CoincidentPoints);
}

TEST_CASE("split wavenumbers") {
  for (int n = 1; n <= 4; ++n) {
    const SplitWavenumbers s(3.0, n);
    REQUIRE(s.kappa.size() == static_cast<std::size_t>(n));
    CHECK(s.kappa[0] == cplx(3.0, 0.0));
    for (const cplx kap : s.kappa) {
      CHECK(kap.imag() >= 0.0);
      CHECK(std::abs(std::pow(kap, 2 * n) - std::pow(3.0, 2 * n)) <= 1e-12 * std::pow(3.0, 2 * n));
    }
  }
}

TEST_CASE("polyharmonic green reduces to helmholtz for n = 1 and splits for n = 2") {
  const Vec3 x(0.1, 0.2, 0.3), y(-0.4, 0.5, 1.1);
  for (int d : {2, 3}) {
    CHECK(polyharmonic_green(x, y, 2.0, 1, d) == helmholtz_green(x, y, 2.0, d));
    const cplx expect = 0.5 * (helmholtz_green(x, y, 1.0, d) - helmholtz_green(x, y, 1i, d));
    CHECK(rel(polyharmonic_green(x, y, 1.0, 2, d), expect) <= 1e-14);
  }
}

TEST_CASE("partial fraction identity") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> uk(1.0, 50.0), ut(0.0, 5.0);
  std::uniform_int_distribution<int> un(1, 4);
  for (int trial = 0; trial < 1000; ++trial) {
    const double k = uk(gen);
    const int n = un(gen);
    double xi = ut(gen) * k;
    if (std::abs(xi - k) < 1e-3 * k) xi += 0.01 * k;
    const double t = xi * xi;
    const SplitWavenumbers s(k, n);
    const double exact = 1.0 / (std::pow(t, n) - std::pow(k, 2 * n));
    REQUIRE(std::abs(s.partial_fraction(t) - exact) <= 1e-10 * std::abs(exact));
  }
}

TEST_CASE("near field of zero, point mass and linearity") {
  const SpatialGrid grid(3, 16);
  const std::vector<Vec3> targets{Vec3(6, 0, 0), Vec3(0, -5, 3), Vec3(4, 4, 4)};
  const auto zero = near_field(FieldRealization::zeros(grid, 1), targets, 2.0, 1);
  for (const cplx v : zero) CHECK(v == cplx(0.0));

  auto point = FieldRealization::zeros(grid, 1);
  const std::size_t origin = (8 * 16 + 8) * 16 + 8;
  REQUIRE(grid.node(origin).norm() == 0.0);
  point.values[origin] = 1.0 / grid.cell_volume();
  const auto u = near_field(point, targets, 2.0, 1);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    CHECK(rel(u[i], -helmholtz_green(targets[i], Vec3::Zero(), 2.0, 3)) <= 1e-2);
  }

  const auto f = gaussian_field(grid, 0.2);
  auto f3 = f;
  for (double& v : f3.values) v *= 3.0;
  const auto a = near_field(f, targets, 2.0, 2);
  const auto b = near_field(f3, targets, 2.0, 2);
  for (std::size_t i = 0; i < targets.size(); ++i) CHECK(std::abs(b[i] - 3.0 * a[i]) <= 1e-14 * std::abs(b[i]));

  CHECK(code_of([&] { near_field(f, std::vector<Vec3>{Vec3(1.5, 0, 0)}, 2.0, 1); }) ==
        ErrorCode::TargetInsideSupport);
}

TEST_CASE("far-field asymptotics decay like 1/R") {
  for (int d : {2, 3}) {
    const SpatialGrid grid(d, d == 2 ? 32 : 16);
    const auto f = gaussian_field(grid, 0.2, d == 2 ? Vec3(0.1, -0.05, 0) : Vec3(0.1, -0.05, 0.02));
    const Vec3 xhat = d == 2 ? Vec3(0.6, 0.8, 0) : Vec3(0.48, 0.6, 0.64);
    for (int n : {1, 2}) {
      const std::vector<double> radii{100.0, 200.0};
      const auto r = asymptote_residual(f, 3.0, n, xhat, radii);
      CAPTURE(d);
      CAPTURE(n);
      CHECK(r[1] / r[0] >= 0.35);
      CHECK(r[1] / r[0] <= 0.65);
    }
  }
}

TEST_CASE("far-field asymptote residual is small relative to the pattern") {
  const SpatialGrid grid(3, 16);
  const auto f = gaussian_field(grid, 0.2);
  const Vec3 xhat(0, 0, 1);
  const std::vector<Vec3> dirs{xhat};
  const double uinf = std::abs(poly_farfield(f, 2.0, 1, dirs)[0].scalar());
  const std::vector<double> radii{200.0};
  CHECK(asymptote_residual(f, 2.0, 1, xhat, radii)[0] < 1e-3 * uinf);

  const std::vector<double> all{10.0, 50.0, 400.0};
  for (double r : asymptote_residual(FieldRealization::zeros(grid, 1), 2.0, 1, xhat, all)) CHECK(r == 0.0);
  const std::vector<double> near{5.0};
  CHECK(code_of([&] { asymptote_residual(f, 2.0, 1, xhat, near); }) == ErrorCode::DomainError);
}
