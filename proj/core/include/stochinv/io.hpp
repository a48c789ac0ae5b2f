#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochinv/params.hpp"
#include "stochinv/sampler.hpp"

namespace stochinv {

/// Grid data container: `<stem>.bin` holds raw 64-bit little-endian floats, `<stem>.json`
/// describes them. `values_per_node` doubles per node; layout is either "node-major"
/// (all values of node 0, then node 1, ...) or "component-major".
struct ContainerHeader {
  std::string kind;
  SpatialGrid grid{2, 2, 2.0};
  int values_per_node = 1;
  std::string layout = "node-major";
  std::map<std::string, std::string> tags;
  std::map<std::string, double> numbers;
  std::optional<std::uint64_t> seed;
};

std::filesystem::path container_data_path(const std::filesystem::path& stem);
std::filesystem::path container_sidecar_path(const std::filesystem::path& stem);

void write_container(const std::filesystem::path& stem, const ContainerHeader& header, std::span<const double> data);

struct Container {
  ContainerHeader header;
  std::vector<double> data;
};
Container read_container(const std::filesystem::path& stem);

/// Strength fields store d*d values per node (row-major block) for matrices.
/// `model`, `m` and `s` are recorded when a checked source is given.
void save_strength(const std::filesystem::path& stem, const StrengthField& strength,
                   const CheckedSource* source = nullptr);
StrengthField load_strength(const std::filesystem::path& stem);

void save_realization(const std::filesystem::path& stem, const FieldRealization& f);
FieldRealization load_realization(const std::filesystem::path& stem);

}  // namespace stochinv
