#include "stochinv/farfield.hpp"

#include <cmath>

namespace stochinv {

std::string_view to_string(Channel c) noexcept {
  switch (c) {
    case Channel::Scalar: return "scalar";
    case Channel::Electric: return "electric";
    case Channel::Compressional: return "compressional";
    case Channel::Shear: return "shear";
  }
  return "?";
}

ElasticWavenumbers::ElasticWavenumbers(double k_, const LameParameters& lame) : k(k_) {
  if (!(lame.mu > 0.0) || !(lame.lambda + lame.mu > 0.0)) {
    throw Error(ErrorCode::LameViolation, "need mu > 0 and lambda + mu > 0");
  }
  c_p = 1.0 / std::sqrt(lame.lambda + 2.0 * lame.mu);
  c_s = 1.0 / std::sqrt(lame.mu);
  k_p = c_p * k;
  k_s = c_s * k;
}

cplx fourier_at(const SpatialGrid& grid, std::span<const double> values, const Vec3& w) {
  const int d = grid.dim();
  const int n = grid.points_per_axis();
  if (values.size() != grid.size()) throw Error(ErrorCode::DimensionMismatch, "value count differs from grid size");

  // e^{-i w_a x_i} per axis.
  std::vector<cplx> table(static_cast<std::size_t>(d * n));
  for (int a = 0; a < d; ++a) {
    for (int i = 0; i < n; ++i) table[static_cast<std::size_t>(a * n + i)] = std::polar(1.0, -w[a] * grid.coordinate(i));
  }
  const cplx* e0 = table.data();
  const cplx* e1 = table.data() + n;
  const cplx* e2 = table.data() + 2 * n;

  cplx total = 0.0;
  if (d == 2) {
    for (int i = 0; i < n; ++i) {
      const double* row = values.data() + static_cast<std::size_t>(i) * n;
      cplx acc = 0.0;
      bool any = false;
      for (int j = 0; j < n; ++j) {
        if (row[j] != 0.0) {
          acc += row[j] * e1[j];
          any = true;
        }
      }
      if (any) total += e0[i] * acc;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      cplx plane = 0.0;
      for (int j = 0; j < n; ++j) {
        const double* row = values.data() + (static_cast<std::size_t>(i) * n + j) * n;
        cplx acc = 0.0;
        bool any = false;
        for (int l = 0; l < n; ++l) {
          if (row[l] != 0.0) {
            acc += row[l] * e2[l];
            any = true;
          }
        }
        if (any) plane += e1[j] * acc;
      }
      total += e0[i] * plane;
    }
  }
  return total * grid.cell_volume();
}

CVec3 fourier_at(const FieldRealization& f, const Vec3& w) {
  CVec3 out = CVec3::Zero();
  for (int c = 0; c < f.components; ++c) out[c] = fourier_at(f.grid, f.component(c), w);
  return out;
}

cplx strength_transform(const StrengthField& sigma, const Vec3& gamma) {
  if (sigma.is_matrix()) {
    const auto tr = sigma.trace_values();
    return fourier_at(sigma.grid(), tr, gamma);
  }
  return fourier_at(sigma.grid(), sigma.scalar_values(), gamma);
}

CMat3 strength_matrix_transform(const StrengthField& sigma, const Vec3& gamma) {
  if (!sigma.is_matrix()) throw Error(ErrorCode::DimensionMismatch, "matrix transform needs a matrix strength");
  const int d = sigma.grid().dim();
  const auto mats = sigma.matrix_values();
  CMat3 out = CMat3::Zero();
  std::vector<double> entry(mats.size());
  for (int r = 0; r < d; ++r) {
    for (int c = r; c < d; ++c) {
      for (std::size_t i = 0; i < mats.size(); ++i) entry[i] = mats[i](r, c);
      out(r, c) = fourier_at(sigma.grid(), entry, gamma);
      out(c, r) = out(r, c);
    }
  }
  return out;
}

std::vector<FarFieldSample> poly_farfield(const FieldRealization& f, double k, int n, std::span<const Vec3> dirs) {
  if (f.components != 1) throw Error(ErrorCode::DimensionMismatch, "polyharmonic far field needs a scalar source");
  if (!(k > 0.0)) throw Error(ErrorCode::DomainError, "wavenumber must be positive");
  const int d = f.grid.dim();
  const cplx pre = -(beta(d) / static_cast<double>(n)) * std::pow(k, 0.5 * (d + 1 - 4 * n));
  std::vector<FarFieldSample> out;
  out.reserve(dirs.size());
  for (const auto& x : dirs) {
    FarFieldSample s{x, CVec3::Zero(), k, Channel::Scalar, d};
    s.value[0] = pre * fourier_at(f.grid, f.values, k * x);
    out.push_back(s);
  }
  return out;
}

std::vector<FarFieldSample> em_farfield(const FieldRealization& f, double k, std::span<const Vec3> dirs) {
  if (f.grid.dim() != 3 || f.components != 3) {
    throw Error(ErrorCode::DimensionMismatch, "electromagnetic far field needs a 3-vector source in 3D");
  }
  const cplx pre = cplx(0.0, k) * beta(3);
  std::vector<FarFieldSample> out;
  out.reserve(dirs.size());
  for (const auto& x : dirs) out.push_back({x, pre * fourier_at(f, k * x), k, Channel::Electric, 3});
  return out;
}

std::vector<std::pair<FarFieldSample, FarFieldSample>> elastic_farfield(const FieldRealization& f, double k,
                                                                        const LameParameters& lame,
                                                                        std::span<const Vec3> dirs) {
  const int d = f.grid.dim();
  if (f.components != d) throw Error(ErrorCode::DimensionMismatch, "elastic far field needs a d-vector source");
  const ElasticWavenumbers w(k, lame);
  const double kpow = std::pow(k, 0.5 * (d - 3));
  const cplx pre_p = -beta(d) * std::pow(w.c_p, 0.5 * (d + 2)) * kpow;
  const cplx pre_s = -beta(d) * std::pow(w.c_s, 0.5 * (d + 2)) * kpow;
  std::vector<std::pair<FarFieldSample, FarFieldSample>> out;
  out.reserve(dirs.size());
  for (const auto& x : dirs) {
    const CVec3 fp = fourier_at(f, w.k_p * x);
    const CVec3 fs = fourier_at(f, w.k_s * x);
    const CVec3 xc = x.cast<cplx>();
    const CVec3 up = pre_p * xc * xc.dot(fp);  // dot() conjugates its left argument; x is real
    const CVec3 us = pre_s * (fs - xc * xc.dot(fs));
    out.emplace_back(FarFieldSample{x, up, k, Channel::Compressional, d}, FarFieldSample{x, us, k, Channel::Shear, d});
  }
  return out;
}

std::vector<Vec3> direction_set(int d, int count) {
  if (count < 1) throw Error(ErrorCode::EmptyInput, "direction count must be positive");
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (d == 2) {
    for (int j = 0; j < count; ++j) {
      const double t = 2.0 * kPi * j / count;
      dirs.emplace_back(std::cos(t), std::sin(t), 0.0);
    }
  } else if (d == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < count; ++j) {
      const double z = 1.0 - (2.0 * j + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * j;
      dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  } else {
    throw Error(ErrorCode::DimensionMismatch, "dimension must be 2 or 3");
  }
  return dirs;
}

}  // namespace stochinv
