#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochinv/correlation.hpp"
#include "stochinv/params.hpp"

namespace stochinv::experiment {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.3.0";

struct ModelConfig {
  std::string kind = "polyharmonic";
  int d = 2;
  int n = 1;
  double lambda = 2.0;
  double mu = 1.0;
  bool operator==(const ModelConfig&) const = default;
};

struct BumpConfig {
  std::vector<double> center{0.0, 0.0};
  double width = 0.15;
  double amplitude = 1.0;
  std::vector<std::vector<double>> weight;  // empty = identity
  bool operator==(const BumpConfig&) const = default;
};

struct CosineConfig {
  std::vector<double> center{0.0, 0.0};
  double radius = 1.0;
  double power = 4.0;
  double amplitude = 1.0;
  std::vector<std::vector<double>> weight;
  bool operator==(const CosineConfig&) const = default;
};

/// kind: "gaussian" (bumps), "raised_cosine" (cosine) or "zero".
struct StrengthConfig {
  std::string kind = "gaussian";
  std::vector<BumpConfig> bumps{BumpConfig{}};
  CosineConfig cosine;
  bool operator==(const StrengthConfig&) const = default;
};

/// policy: "max" (2k, or k_p for elastic), "theory" (k^{1/s}) or "fixed" (rho).
struct CutoffConfig {
  std::string policy = "max";
  double rho = 0.0;
  bool operator==(const CutoffConfig&) const = default;
};

struct AsymptoteConfig {
  bool enabled = false;
  std::vector<double> radii{100.0, 200.0};
  std::vector<double> direction{1.0, 0.0};
  bool operator==(const AsymptoteConfig&) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ModelConfig model;
  double m = 2.0;
  int s = 4;
  int points_per_axis = 64;
  double box_length = 4.0;
  StrengthConfig strength;
  std::vector<double> k{8.0, 16.0, 32.0, 64.0};
  int directions = 128;
  std::string pair_set = "all";  // "all" or "antipodal"
  std::string pathway = "analytic";
  int realizations = 0;
  std::uint64_t seed = 1;
  bool leray = false;
  int threads = 1;
  CutoffConfig cutoff;
  std::optional<double> reconstruct_k;
  bool probe = true;
  AsymptoteConfig asymptote;
  std::string output_dir = "out";
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parse / serialize the JSON config. Schema problems raise ConfigInvalid.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Builds and validates model and source. Domain errors propagate with their own codes;
/// inconsistent fields raise ConfigInvalid.
struct Prepared {
  WaveModel model;
  CheckedSource source;
  std::optional<GaussianStrength> gaussian;
};
Prepared prepare(const ExperimentConfig& config);

struct StageTiming {
  std::string name;
  double seconds = 0.0;
};

struct FileEntry {
  std::string path;  // relative to the manifest directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  int schema_version = kSchemaVersion;
  std::string artifact_version = kArtifactVersion;
  std::string config_hash;
  std::string config;
  std::vector<StageTiming> stages;
  std::vector<FileEntry> files;
  std::map<std::string, std::string> series;  // series name -> file path
  std::map<std::string, double> summary;
  std::filesystem::path directory;
};

/// Runs the configured pipeline and writes manifest.json into the output directory.
/// Errors from prepare() propagate unchanged; failures inside a stage raise StageFailure.
RunManifest run(const ExperimentConfig& config);

RunManifest load_manifest(const std::filesystem::path& path);

/// Writes the requested series (tidy columns k, quantity, coord, value, stderr) to `out`
/// after verifying its checksum. Throws SeriesMissing when the manifest lacks it.
std::filesystem::path emit_plot_data(const RunManifest& manifest, const std::string& series,
                                     const std::filesystem::path& out);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Process exit code for an error class.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace stochinv::experiment
