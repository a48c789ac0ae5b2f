#include "experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "stochinv/farfield.hpp"
#include "stochinv/green.hpp"
#include "stochinv/io.hpp"
#include "stochinv/reconstruction.hpp"
#include "stochinv/rng.hpp"
#include "stochinv/sampler.hpp"

namespace stochinv::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) bad_config("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad_config(std::string("bad value for '") + key + "': " + e.what());
  }
}

json matrix_json(const std::vector<std::vector<double>>& w) { return w; }

BumpConfig parse_bump(const json& j) {
  reject_unknown(j, {"center", "width", "amplitude", "weight"}, "bump");
  BumpConfig b;
  read(j, "center", b.center);
  read(j, "width", b.width);
  read(j, "amplitude", b.amplitude);
  read(j, "weight", b.weight);
  return b;
}

json bump_json(const BumpConfig& b) {
  json j = {{"center", b.center}, {"width", b.width}, {"amplitude", b.amplitude}};
  if (!b.weight.empty()) j["weight"] = matrix_json(b.weight);
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad_config(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_config("config must be a JSON object");
  reject_unknown(j,
                 {"schema_version", "model", "source", "k", "directions", "pair_set", "pathway", "realizations", "seed",
                  "leray", "threads", "cutoff", "reconstruct_k", "probe", "asymptote", "output_dir"},
                 "config");
  ExperimentConfig c;
  if (!j.contains("schema_version")) bad_config("missing schema_version");
  read(j, "schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    bad_config("unsupported schema_version " + std::to_string(c.schema_version));
  }
  if (!j.contains("model") || !j.contains("source")) bad_config("config needs 'model' and 'source'");

  const json& jm = j.at("model");
  reject_unknown(jm, {"kind", "d", "n", "lambda", "mu"}, "model");
  read(jm, "kind", c.model.kind);
  read(jm, "d", c.model.d);
  read(jm, "n", c.model.n);
  read(jm, "lambda", c.model.lambda);
  read(jm, "mu", c.model.mu);

  const json& js = j.at("source");
  reject_unknown(js, {"m", "s", "points_per_axis", "box_length", "strength"}, "source");
  read(js, "m", c.m);
  read(js, "s", c.s);
  read(js, "points_per_axis", c.points_per_axis);
  read(js, "box_length", c.box_length);
  if (js.contains("strength")) {
    const json& st = js.at("strength");
    reject_unknown(st, {"kind", "bumps", "center", "radius", "power", "amplitude", "weight"}, "strength");
    read(st, "kind", c.strength.kind);
    if (st.contains("bumps")) {
      c.strength.bumps.clear();
      for (const auto& b : st.at("bumps")) c.strength.bumps.push_back(parse_bump(b));
    }
    read(st, "center", c.strength.cosine.center);
    read(st, "radius", c.strength.cosine.radius);
    read(st, "power", c.strength.cosine.power);
    read(st, "amplitude", c.strength.cosine.amplitude);
    read(st, "weight", c.strength.cosine.weight);
  }

  read(j, "k", c.k);
  read(j, "directions", c.directions);
  read(j, "pair_set", c.pair_set);
  read(j, "pathway", c.pathway);
  read(j, "realizations", c.realizations);
  read(j, "seed", c.seed);
  read(j, "leray", c.leray);
  read(j, "threads", c.threads);
  if (j.contains("cutoff")) {
    reject_unknown(j.at("cutoff"), {"policy", "rho"}, "cutoff");
    read(j.at("cutoff"), "policy", c.cutoff.policy);
    read(j.at("cutoff"), "rho", c.cutoff.rho);
  }
  if (j.contains("reconstruct_k") && !j.at("reconstruct_k").is_null()) {
    double v = 0.0;
    read(j, "reconstruct_k", v);
    c.reconstruct_k = v;
  }
  read(j, "probe", c.probe);
  if (j.contains("asymptote")) {
    const json& ja = j.at("asymptote");
    reject_unknown(ja, {"enabled", "radii", "direction"}, "asymptote");
    read(ja, "enabled", c.asymptote.enabled);
    read(ja, "radii", c.asymptote.radii);
    read(ja, "direction", c.asymptote.direction);
  }
  read(j, "output_dir", c.output_dir);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json strength = {{"kind", c.strength.kind}};
  if (c.strength.kind == "gaussian") {
    strength["bumps"] = json::array();
    for (const auto& b : c.strength.bumps) strength["bumps"].push_back(bump_json(b));
  } else if (c.strength.kind == "raised_cosine") {
    strength["center"] = c.strength.cosine.center;
    strength["radius"] = c.strength.cosine.radius;
    strength["power"] = c.strength.cosine.power;
    strength["amplitude"] = c.strength.cosine.amplitude;
    if (!c.strength.cosine.weight.empty()) strength["weight"] = matrix_json(c.strength.cosine.weight);
  }
  json j = {
      {"schema_version", c.schema_version},
      {"model", {{"kind", c.model.kind}, {"d", c.model.d}, {"n", c.model.n}, {"lambda", c.model.lambda},
                 {"mu", c.model.mu}}},
      {"source", {{"m", c.m}, {"s", c.s}, {"points_per_axis", c.points_per_axis}, {"box_length", c.box_length},
                  {"strength", strength}}},
      {"k", c.k},
      {"directions", c.directions},
      {"pair_set", c.pair_set},
      {"pathway", c.pathway},
      {"realizations", c.realizations},
      {"seed", c.seed},
      {"leray", c.leray},
      {"threads", c.threads},
      {"cutoff", {{"policy", c.cutoff.policy}, {"rho", c.cutoff.rho}}},
      {"reconstruct_k", c.reconstruct_k ? json(*c.reconstruct_k) : json(nullptr)},
      {"probe", c.probe},
      {"asymptote", {{"enabled", c.asymptote.enabled}, {"radii", c.asymptote.radii},
                     {"direction", c.asymptote.direction}}},
      {"output_dir", c.output_dir},
  };
  return j.dump(2);
}

// ---------------------------------------------------------------- prepare

namespace {

Vec3 to_point(const std::vector<double>& v, int d, const char* what) {
  if (static_cast<int>(v.size()) != d) bad_config(std::string(what) + " needs " + std::to_string(d) + " coordinates");
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < d; ++i) p[i] = v[static_cast<std::size_t>(i)];
  return p;
}

RMat3 to_weight(const std::vector<std::vector<double>>& w, int d) {
  if (w.empty()) return identity(d);
  if (static_cast<int>(w.size()) != d) bad_config("weight must be a d x d matrix");
  RMat3 a = RMat3::Zero();
  for (int r = 0; r < d; ++r) {
    if (static_cast<int>(w[static_cast<std::size_t>(r)].size()) != d) bad_config("weight must be a d x d matrix");
    for (int c = 0; c < d; ++c) a(r, c) = w[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return a;
}

WaveModel build_model(const ModelConfig& m) {
  switch (model_kind_from_string(m.kind)) {
    case ModelKind::Polyharmonic: return WaveModel::polyharmonic(m.d, m.n);
    case ModelKind::Electromagnetic:
      if (m.d != 3) throw Error(ErrorCode::InvalidModel, "electromagnetic model needs d = 3");
      return WaveModel::electromagnetic();
    case ModelKind::Elastic: return WaveModel::elastic(m.d, m.lambda, m.mu);
  }
  throw Error(ErrorCode::InvalidModel, "unknown model");
}

}  // namespace

Prepared prepare(const ExperimentConfig& c) {
  const WaveModel model = build_model(c.model);
  const int d = model.dim();
  const SpatialGrid grid(d, c.points_per_axis, c.box_length);
  const bool matrix = model.vector_valued();

  std::optional<GaussianStrength> gaussian;
  std::optional<StrengthField> field;
  if (c.strength.kind == "gaussian") {
    std::vector<GaussianBump> bumps;
    for (const auto& b : c.strength.bumps) {
      bumps.push_back({to_point(b.center, d, "bump center"), b.width, b.amplitude, to_weight(b.weight, d)});
    }
    gaussian.emplace(d, std::move(bumps), matrix);
    field = gaussian->rasterize(grid);
  } else if (c.strength.kind == "raised_cosine") {
    const auto& q = c.strength.cosine;
    field = raised_cosine_strength(
        grid, RaisedCosineBump{to_point(q.center, d, "center"), q.radius, q.power, q.amplitude, to_weight(q.weight, d)},
        matrix);
  } else if (c.strength.kind == "zero") {
    field = matrix ? StrengthField::matrix(grid, std::vector<RMat3>(grid.size(), RMat3::Zero()))
                   : StrengthField::scalar(grid, std::vector<double>(grid.size(), 0.0));
  } else {
    bad_config("unknown strength kind '" + c.strength.kind + "'");
  }

  auto source = validate_source(model, SourceSpec{c.m, c.s, *field});

  if (c.k.empty()) bad_config("k list is empty");
  for (double k : c.k) {
    if (!(k > 1.0)) bad_config("every k must exceed 1");
  }
  if (c.directions < 1) bad_config("directions must be positive");
  if (c.pair_set != "all" && c.pair_set != "antipodal") bad_config("pair_set must be 'all' or 'antipodal'");
  const Pathway pathway = pathway_from_string(c.pathway);
  if (pathway == Pathway::MonteCarlo && c.realizations < 2) bad_config("Monte Carlo needs realizations >= 2");
  if (c.seed == 0) bad_config("seed must be positive");
  if (c.threads < 1) bad_config("threads must be positive");
  if (c.leray && model.kind() != ModelKind::Electromagnetic) bad_config("leray applies to the electromagnetic model");
  if (c.cutoff.policy != "max" && c.cutoff.policy != "theory" && c.cutoff.policy != "fixed") {
    bad_config("cutoff policy must be max, theory or fixed");
  }
  if (c.cutoff.policy == "fixed" && !(c.cutoff.rho > 0.0)) bad_config("fixed cutoff needs rho > 0");
  if (c.reconstruct_k && !(*c.reconstruct_k > 1.0)) bad_config("reconstruct_k must exceed 1");
  if (c.probe && !(c.s > model.smoothness_floor())) {
    throw Error(ErrorCode::SmoothnessTooLow, "probe requested but s = " + std::to_string(c.s) +
                                                 " does not exceed " + std::to_string(model.smoothness_floor()));
  }
  if (c.asymptote.enabled) {
    if (model.kind() != ModelKind::Polyharmonic) bad_config("asymptote stage needs the polyharmonic model");
    if (c.asymptote.radii.empty()) bad_config("asymptote radii empty");
    const Vec3 dir = to_point(c.asymptote.direction, d, "asymptote direction");
    if (std::abs(dir.norm() - 1.0) > 1e-12) bad_config("asymptote direction must be a unit vector");
  }
  return Prepared{model, std::move(source), std::move(gaussian)};
}

// ---------------------------------------------------------------- hashing, fits, exit codes

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::EmptyInput, "slope needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigInvalid: return 3;
    case ErrorCode::OrderOutOfRange:
    case ErrorCode::SupportViolation:
    case ErrorCode::NotNonnegDefinite:
    case ErrorCode::InvalidModel:
    case ErrorCode::InvalidGrid:
    case ErrorCode::LameViolation:
    case ErrorCode::SmoothnessTooLow:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::DomainError: return 4;
    case ErrorCode::StageFailure: return 5;
    case ErrorCode::IoError: return 6;
    case ErrorCode::SeriesMissing: return 7;
    default: return 1;
  }
}

// ---------------------------------------------------------------- correlation engine

namespace {

struct Request {
  int xi;
  int yi;
  Channel channel;
};

/// Direction pairs to correlate, with deduplicated directions so each realization's far
/// field is evaluated once per direction.
struct RequestSet {
  std::vector<Vec3> dirs;
  std::vector<Request> requests;
  std::map<std::array<double, 3>, int> index;

  int direction(const Vec3& v) {
    const std::array<double, 3> key{v[0], v[1], v[2]};
    auto [it, inserted] = index.emplace(key, static_cast<int>(dirs.size()));
    if (inserted) dirs.push_back(v);
    return it->second;
  }
  std::size_t add(const Vec3& x, const Vec3& y, Channel ch) {
    requests.push_back({direction(x), direction(y), ch});
    return requests.size() - 1;
  }
};

std::vector<Channel> channels_of(const WaveModel& model) {
  switch (model.kind()) {
    case ModelKind::Polyharmonic: return {Channel::Scalar};
    case ModelKind::Electromagnetic: return {Channel::Electric};
    case ModelKind::Elastic: return {Channel::Compressional, Channel::Shear};
  }
  return {};
}

struct Context {
  const ExperimentConfig& config;
  const Prepared& prep;
  Pathway pathway;
  ScalarSpectrum scalar_hat;
  MatrixSpectrum matrix_hat;
};

CorrelationRecord analytic_record(const Context& ctx, double k, const Vec3& x, const Vec3& y, Channel ch) {
  const auto& model = ctx.prep.model;
  const double m = ctx.config.m;
  switch (model.kind()) {
    case ModelKind::Polyharmonic:
      return analytic_correlation_poly(ctx.scalar_hat, k, model.order(), model.dim(), m, x, y);
    case ModelKind::Electromagnetic: return analytic_correlation_em(ctx.matrix_hat, k, m, x, y);
    case ModelKind::Elastic:
      return analytic_correlation_elastic(ctx.matrix_hat, k, model.lame(), model.dim(), m, x, y, ch);
  }
  throw Error(ErrorCode::InvalidModel, "unknown model");
}

// Far-field values of one realization at every direction: [direction][channel slot].
std::vector<std::array<CVec3, 2>> farfields(const Context& ctx, const FieldRealization& f, double k,
                                            const std::vector<Vec3>& dirs) {
  const auto& model = ctx.prep.model;
  std::vector<std::array<CVec3, 2>> out(dirs.size(), {CVec3::Zero(), CVec3::Zero()});
  switch (model.kind()) {
    case ModelKind::Polyharmonic: {
      const auto s = poly_farfield(f, k, model.order(), dirs);
      for (std::size_t i = 0; i < dirs.size(); ++i) out[i][0] = s[i].value;
      break;
    }
    case ModelKind::Electromagnetic: {
      const auto s = em_farfield(f, k, dirs);
      for (std::size_t i = 0; i < dirs.size(); ++i) out[i][0] = s[i].value;
      break;
    }
    case ModelKind::Elastic: {
      const auto s = elastic_farfield(f, k, model.lame(), dirs);
      for (std::size_t i = 0; i < dirs.size(); ++i) out[i] = {s[i].first.value, s[i].second.value};
      break;
    }
  }
  return out;
}

constexpr int kBatch = 64;

std::vector<CorrelationRecord> evaluate(const Context& ctx, double k, const RequestSet& set) {
  const auto& model = ctx.prep.model;
  const int d = model.dim();
  std::vector<CorrelationRecord> out;
  out.reserve(set.requests.size());
  if (ctx.pathway == Pathway::Analytic) {
    for (const auto& r : set.requests) {
      out.push_back(analytic_record(ctx, k, set.dirs[static_cast<std::size_t>(r.xi)],
                                    set.dirs[static_cast<std::size_t>(r.yi)], r.channel));
    }
    return out;
  }

  const bool matrix = model.vector_valued();
  const int n_real = ctx.config.realizations;
  const int n_batches = (n_real + kBatch - 1) / kBatch;
  const auto fresh = [&] {
    return std::vector<CorrelationAccumulator>(set.requests.size(), CorrelationAccumulator(matrix, d));
  };
  const auto run_batch = [&](int b) {
    auto acc = fresh();
    for (int r = b * kBatch; r < std::min(n_real, (b + 1) * kBatch); ++r) {
      auto f = sample(ctx.prep.source, derive_seed(ctx.config.seed, static_cast<std::uint64_t>(r)));
      if (ctx.config.leray) f = leray_project(f);
      const auto u = farfields(ctx, f, k, set.dirs);
      for (std::size_t q = 0; q < set.requests.size(); ++q) {
        const auto& req = set.requests[q];
        const int slot = req.channel == Channel::Shear ? 1 : 0;
        acc[q].add(u[static_cast<std::size_t>(req.xi)][slot], u[static_cast<std::size_t>(req.yi)][slot]);
      }
    }
    return acc;
  };

  // Batches have a fixed size and are merged in index order, so the result does not depend
  // on the thread count.
  auto total = fresh();
  const int T = std::max(1, ctx.config.threads);
  for (int wave = 0; wave < n_batches; wave += T) {
    const int count = std::min(T, n_batches - wave);
    std::vector<std::vector<CorrelationAccumulator>> parts(static_cast<std::size_t>(count));
    if (count == 1) {
      parts[0] = run_batch(wave);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
      for (int t = 0; t < count; ++t) {
        pool.emplace_back([&, t] {
          try {
            parts[static_cast<std::size_t>(t)] = run_batch(wave + t);
          } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (const auto& part : parts)
      for (std::size_t q = 0; q < total.size(); ++q) total[q].merge(part[q]);
  }
  for (std::size_t q = 0; q < set.requests.size(); ++q) {
    const auto& r = set.requests[q];
    out.push_back(total[q].record(set.dirs[static_cast<std::size_t>(r.xi)], set.dirs[static_cast<std::size_t>(r.yi)], k,
                                  r.channel));
  }
  return out;
}

// ---------------------------------------------------------------- output helpers

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class TidyCsv {
 public:
  explicit TidyCsv(const fs::path& path) : out_(path, std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out_ << "k,quantity,coord,value,stderr\n";
  }
  void row(double k, const std::string& quantity, const std::string& coord, double value, double stderr) {
    out_ << num(k) << ',' << quantity << ',' << coord << ',' << num(value) << ',' << num(stderr) << '\n';
  }

 private:
  std::ofstream out_;
};

double analytic_prefactor(const WaveModel& model, double k, double m) {
  const int d = model.dim();
  const double b2 = std::norm(beta(d));
  switch (model.kind()) {
    case ModelKind::Polyharmonic: {
      const int n = model.order();
      return b2 / (n * n) * std::pow(k, d + 1 - 4 * n - m);
    }
    case ModelKind::Electromagnetic: return b2 * std::pow(k, 2.0 - m);
    case ModelKind::Elastic: {
      const ElasticWavenumbers w(k, model.lame());
      return b2 * std::pow(w.c_p, d + 2 - m) * std::pow(k, d - 3 - m);
    }
  }
  return 1.0;
}

double expected_slope(const WaveModel& model, double m) {
  const int d = model.dim();
  switch (model.kind()) {
    case ModelKind::Polyharmonic: return d + 1 - 4 * model.order() - m;
    case ModelKind::Electromagnetic: return 2.0 - m;
    case ModelKind::Elastic: return d - 3 - m;
  }
  return 0.0;
}

double cutoff_for(const ExperimentConfig& c, const WaveModel& model, double k) {
  const double limit = model.kind() == ModelKind::Elastic ? ElasticWavenumbers(k, model.lame()).k_p : 2.0 * k;
  if (c.cutoff.policy == "theory") return std::min(limit, std::pow(k, 1.0 / c.s));
  if (c.cutoff.policy == "fixed") {
    if (c.cutoff.rho > limit) bad_config("fixed cutoff exceeds the recoverable radius " + num(limit));
    return c.cutoff.rho;
  }
  return limit;
}

template <class F>
void stage(RunManifest& manifest, const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StageFailure) throw;
    throw Error(ErrorCode::StageFailure, "stage '" + name + "': " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::StageFailure, "stage '" + name + "': " + e.what());
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  manifest.stages.push_back({name, dt.count()});
}

}  // namespace

// ---------------------------------------------------------------- run

RunManifest run(const ExperimentConfig& config) {
  const Prepared prep = prepare(config);
  const WaveModel& model = prep.model;
  const int d = model.dim();
  const double m = config.m;
  const auto& sigma = prep.source.strength();

  Context ctx{config, prep, pathway_from_string(config.pathway), {}, {}};
  if (prep.gaussian) {
    ctx.scalar_hat = closed_form_spectrum(*prep.gaussian);
    ctx.matrix_hat = closed_form_matrix_spectrum(*prep.gaussian);
  } else {
    ctx.scalar_hat = quadrature_spectrum(sigma);
    if (sigma.is_matrix()) ctx.matrix_hat = quadrature_matrix_spectrum(sigma);
  }

  RunManifest manifest;
  const fs::path dir = config.output_dir;
  try {
    fs::create_directories(dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::IoError, e.what());
  }
  manifest.directory = dir;
  manifest.config = serialize_config(config);
  manifest.config_hash = sha256_hex(manifest.config);
  std::vector<std::string> written;

  stage(manifest, "source", [&] {
    std::ofstream(dir / "config.json", std::ios::trunc) << manifest.config << '\n';
    written.push_back("config.json");
    save_strength(dir / "strength", sigma, &prep.source);
    written.push_back("strength.bin");
    written.push_back("strength.json");
  });

  // Correlations and sup statistics per k.
  const auto dirs = direction_set(d, config.directions);
  const auto channels = channels_of(model);
  std::map<double, SupStatistic> sups;
  double c1_estimate = 0.0;
  bool all_within = true;

  stage(manifest, "correlation", [&] {
    RequestSet set;
    const auto pairs = config.pair_set == "all" ? direction_pairs(dirs) : antipodal_pairs(dirs);
    for (const auto& [x, y] : pairs)
      for (Channel ch : channels) set.add(x, y, ch);

    TidyCsv tidy(dir / "correlations.csv");
    std::ofstream full(dir / "correlations_full.csv", std::ios::trunc);
    full << "k,pair,channel,x0,x1,x2,y0,y1,y2,row,col,re,im,stderr,n_samples,pathway\n";
    TidyCsv scaling(dir / "scaling.csv");

    for (double k : config.k) {
      const auto records = evaluate(ctx, k, set);
      for (std::size_t q = 0; q < records.size(); ++q) {
        const auto& r = records[q];
        const std::string pair = std::to_string(q);
        tidy.row(k, std::string("norm.") + std::string(to_string(r.channel)), pair, r.norm(), r.stderr);
        const int rows = r.matrix ? r.dim : 1;
        for (int a = 0; a < rows; ++a) {
          for (int b = 0; b < rows; ++b) {
            full << num(k) << ',' << q << ',' << to_string(r.channel) << ',' << num(r.x[0]) << ',' << num(r.x[1])
                 << ',' << num(r.x[2]) << ',' << num(r.y[0]) << ',' << num(r.y[1]) << ',' << num(r.y[2]) << ','
                 << a << ',' << b << ',' << num(r.value(a, b).real()) << ',' << num(r.value(a, b).imag()) << ','
                 << num(r.entry_stderr(a, b)) << ',' << r.n_samples << ',' << to_string(r.pathway) << '\n';
          }
        }
      }
      const auto sup = sup_statistic(records, model.kind(), config.directions);
      sups[k] = sup;
      if (ctx.pathway == Pathway::MonteCarlo) {
        const double pre = analytic_prefactor(model, k, m);
        for (const auto& r : records) {
          const auto a = analytic_record(ctx, k, r.x, r.y, r.channel);
          const double dev = r.matrix ? frobenius(CMat3(r.value - a.value), r.dim) : std::abs(r.scalar() - a.scalar());
          c1_estimate = std::max(c1_estimate, dev / pre * k);
        }
      }
    }

    // Norm taken from the same spectrum that produced M, so the analytic pathway is exact.
    const Vec3 zero = Vec3::Zero();
    double norm = 0.0;
    switch (model.kind()) {
      case ModelKind::Polyharmonic: norm = std::abs(ctx.scalar_hat(zero)); break;
      case ModelKind::Electromagnetic: norm = frobenius(ctx.matrix_hat(zero), 3); break;
      case ModelKind::Elastic: norm = std::abs(ctx.matrix_hat(zero).topLeftCorner(d, d).trace()); break;
    }
    const bool mc = ctx.pathway == Pathway::MonteCarlo;
    for (const auto& [k, sup] : sups) {
      const auto rep = sandwich_check(sup, norm, model, m, mc ? c1_estimate : 0.0, mc ? 4.0 * sup.stderr : 0.0);
      all_within = all_within && rep.within;
      scaling.row(k, "M", "", sup.M, sup.stderr);
      scaling.row(k, "lower", "", rep.lower, 0.0);
      if (rep.upper) scaling.row(k, "upper", "", *rep.upper, 0.0);
      scaling.row(k, "within", "", rep.within ? 1.0 : 0.0, 0.0);
    }
    written.insert(written.end(), {"correlations.csv", "correlations_full.csv", "scaling.csv"});

    std::ofstream meta(dir / "correlations.json", std::ios::trunc);
    meta << json{{"model", to_string(model.kind())},
                 {"k", config.k},
                 {"directions", config.directions},
                 {"pair_set", config.pair_set},
                 {"points_per_axis", config.points_per_axis},
                 {"pathway", config.pathway},
                 {"seed", config.seed},
                 {"realizations", ctx.pathway == Pathway::MonteCarlo ? config.realizations : 0}}
                .dump(2)
         << '\n';
    written.push_back("correlations.json");
  });

  std::vector<double> ks, ms;
  for (const auto& [k, s] : sups) {
    ks.push_back(k);
    ms.push_back(s.M);
  }
  const bool positive = std::all_of(ms.begin(), ms.end(), [](double v) { return v > 0.0; });
  if (ks.size() >= 2 && positive) manifest.summary["slope"] = loglog_slope(ks, ms);
  manifest.summary["expected_slope"] = expected_slope(model, m);
  manifest.summary["sandwich_all_within"] = all_within ? 1.0 : 0.0;
  if (ctx.pathway == Pathway::MonteCarlo) manifest.summary["c1_estimate"] = c1_estimate;

  stage(manifest, "reconstruct", [&] {
    const double k = config.reconstruct_k.value_or(ks.back());
    const double rho = cutoff_for(config, model, k);
    const bool elastic = model.kind() == ModelKind::Elastic;
    const bool matrix_out = model.kind() == ModelKind::Electromagnetic;
    FourierCoefficientGrid coeffs = FourierCoefficientGrid::for_box(sigma.grid(), rho, matrix_out);

    // Only half of the lattice is probed; the mirror half follows from Hermitian symmetry.
    std::vector<std::size_t> half;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      if (i <= coeffs.mirror(i)) half.push_back(i);

    RequestSet set;
    std::vector<std::vector<std::size_t>> slots(half.size());
    const Channel main = channels.front();
    for (std::size_t h = 0; h < half.size(); ++h) {
      const Vec3 g = coeffs.gamma(half[h]);
      if (!elastic) {
        const auto p = directions_for_gamma(g, k, d);
        slots[h].push_back(set.add(p.x, p.y, main));
        continue;
      }
      // Record the probes the elastic recovery asks for, then replay with measured values.
      const BranchCorrelation rec_p = [&](const Vec3& x, const Vec3& y) {
        slots[h].push_back(set.add(x, y, Channel::Compressional));
        return CMat3(CMat3::Zero());
      };
      const BranchCorrelation rec_s = [&](const Vec3& x, const Vec3& y) {
        slots[h].push_back(set.add(x, y, Channel::Shear));
        return CMat3(CMat3::Zero());
      };
      (void)probe_elastic(rec_p, rec_s, g, k, model.lame(), m, d);
    }

    const auto records = evaluate(ctx, k, set);
    for (std::size_t h = 0; h < half.size(); ++h) {
      const std::size_t i = half[h];
      const Vec3 g = coeffs.gamma(i);
      if (elastic) {
        std::size_t next = 0;
        const BranchCorrelation replay = [&](const Vec3&, const Vec3&) {
          return records[slots[h][next++]].value;
        };
        coeffs.values[i] = recover_trace_hat_elastic(replay, replay, g, k, model.lame(), m, d);
      } else if (matrix_out) {
        coeffs.matrices[i] = recover_sigma_hat_em(records[slots[h][0]].value, g, k, m);
      } else {
        coeffs.values[i] = recover_sigma_hat_poly(records[slots[h][0]].scalar(), g, k, model.order(), d, m);
      }
      const std::size_t j = coeffs.mirror(i);
      if (matrix_out) {
        coeffs.matrices[j] = coeffs.matrices[i].conjugate();
      } else {
        coeffs.values[j] = std::conj(coeffs.values[i]);
      }
    }
    hermitian_symmetrize(coeffs);

    auto result = inverse_fourier_cutoff(coeffs, sigma.grid());
    result.k = k;
    const StrengthField planted = elastic ? StrengthField::scalar(sigma.grid(), sigma.trace_values()) : sigma;
    compare_to(result, planted);
    save_reconstruction(dir / "reconstruction", result);
    written.insert(written.end(), {"reconstruction.bin", "reconstruction.json"});
    manifest.summary["reconstruct_k"] = k;
    manifest.summary["rho"] = rho;
    manifest.summary["sup_error"] = *result.sup_error;
    manifest.summary["l1_error"] = *result.l1_error;
    manifest.summary["strength_sup"] = planted.sup_norm();

    // Slice along the first axis through the middle node.
    TidyCsv slice(dir / "slice.csv");
    const auto& grid = sigma.grid();
    const int n = grid.points_per_axis();
    const auto true_vals = planted.trace_values();
    const auto rec_vals = result.recovered.trace_values();
    for (int i = 0; i < n; ++i) {
      std::size_t idx = static_cast<std::size_t>(i);
      for (int a = 1; a < d; ++a) idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(n / 2);
      const std::string x = num(grid.coordinate(i));
      slice.row(k, elastic || matrix_out ? "trace" : "sigma", x, true_vals[idx], 0.0);
      slice.row(k, elastic || matrix_out ? "trace_rec" : "sigma_rec", x, rec_vals[idx], 0.0);
    }
    written.push_back("slice.csv");
  });

  if (config.probe) {
    stage(manifest, "probe", [&] {
      const auto rows = stability_probe(prep.source, ks, ctx.pathway, [&](double k) { return sups.at(k); });
      TidyCsv probe(dir / "probe.csv");
      bool asserted_ok = true;
      for (const auto& r : rows) {
        probe.row(r.k, "M", "", r.M, sups.at(r.k).stderr);
        probe.row(r.k, "k_power", "", r.k_power, 0.0);
        probe.row(r.k, "ratio", "", r.ratio, 0.0);
        probe.row(r.k, "l1_lhs", "", r.l1_lhs, 0.0);
        probe.row(r.k, "l1_rhs", "", r.l1_rhs, 0.0);
        probe.row(r.k, "l1_holds", "", r.l1_holds ? 1.0 : 0.0, 0.0);
        probe.row(r.k, "rho_theory", "", r.rho_theory, 0.0);
        if (r.l1_asserted) asserted_ok = asserted_ok && r.l1_holds;
      }
      manifest.summary["l1_bound_holds"] = asserted_ok ? 1.0 : 0.0;
      written.push_back("probe.csv");
    });
  }

  if (config.asymptote.enabled) {
    stage(manifest, "asymptote", [&] {
      // The planted strength doubles as a deterministic source.
      FieldRealization f{sigma.grid(), 1, sigma.trace_values(), 0, m};
      Vec3 xhat = Vec3::Zero();
      for (int a = 0; a < d; ++a) xhat[a] = config.asymptote.direction[static_cast<std::size_t>(a)];
      TidyCsv out(dir / "asymptote.csv");
      for (double k : ks) {
        const auto res = asymptote_residual(f, k, model.order(), xhat, config.asymptote.radii);
        for (std::size_t i = 0; i < res.size(); ++i) out.row(k, "residual", num(config.asymptote.radii[i]), res[i], 0.0);
      }
      written.push_back("asymptote.csv");
    });
  }

  for (const auto& name : written) {
    const fs::path p = dir / name;
    manifest.files.push_back({name, sha256_file(p), fs::file_size(p)});
  }
  manifest.series["correlation"] = "correlations.csv";
  manifest.series["scaling"] = "scaling.csv";
  manifest.series["reconstruction"] = "slice.csv";
  if (config.probe) manifest.series["probe"] = "probe.csv";
  if (config.asymptote.enabled) manifest.series["asymptote"] = "asymptote.csv";

  json jm = {{"schema_version", manifest.schema_version},
             {"artifact_version", manifest.artifact_version},
             {"config_hash", manifest.config_hash},
             {"config", json::parse(manifest.config)},
             {"series", manifest.series},
             {"summary", manifest.summary}};
  jm["stages"] = json::array();
  for (const auto& s : manifest.stages) jm["stages"].push_back({{"name", s.name}, {"wall_seconds", s.seconds}});
  jm["files"] = json::array();
  for (const auto& f : manifest.files) jm["files"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  std::ofstream(dir / "manifest.json", std::ios::trunc) << jm.dump(2) << '\n';
  return manifest;
}

RunManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read manifest " + path.string());
  RunManifest m;
  try {
    const json j = json::parse(in);
    m.schema_version = j.at("schema_version").get<int>();
    m.artifact_version = j.at("artifact_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config").dump(2);
    m.series = j.at("series").get<std::map<std::string, std::string>>();
    m.summary = j.at("summary").get<std::map<std::string, double>>();
    for (const auto& s : j.at("stages")) m.stages.push_back({s.at("name"), s.at("wall_seconds")});
    for (const auto& f : j.at("files")) m.files.push_back({f.at("path"), f.at("sha256"), f.at("bytes")});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed manifest: ") + e.what());
  }
  m.directory = path.parent_path();
  return m;
}

fs::path emit_plot_data(const RunManifest& manifest, const std::string& series, const fs::path& out) {
  const auto it = manifest.series.find(series);
  if (it == manifest.series.end()) throw Error(ErrorCode::SeriesMissing, "manifest has no series '" + series + "'");
  const auto entry = std::find_if(manifest.files.begin(), manifest.files.end(),
                                  [&](const FileEntry& f) { return f.path == it->second; });
  if (entry == manifest.files.end()) {
    throw Error(ErrorCode::SeriesMissing, "series '" + series + "' is not in the file inventory");
  }
  const fs::path src = manifest.directory / entry->path;
  if (sha256_file(src) != entry->sha256) throw Error(ErrorCode::IoError, "checksum mismatch for " + src.string());
  std::error_code ec;
  if (out.has_parent_path()) fs::create_directories(out.parent_path(), ec);
  if (!ec) fs::copy_file(src, out, fs::copy_options::overwrite_existing, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot write " + out.string() + ": " + ec.message());
  return out;
}

}  // namespace stochinv::experiment
