#include "stochinv/io.hpp"

#include <bit>
#include <fstream>

#include "json.hpp"

namespace stochinv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_le(std::ofstream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

fs::path container_data_path(const fs::path& stem) {
  auto p = stem;
  p += ".bin";
  return p;
}

fs::path container_sidecar_path(const fs::path& stem) {
  auto p = stem;
  p += ".json";
  return p;
}

void write_container(const fs::path& stem, const ContainerHeader& header, std::span<const double> data) {
  const auto expected = header.grid.size() * static_cast<std::size_t>(header.values_per_node);
  if (data.size() != expected) throw Error(ErrorCode::DimensionMismatch, "container payload size mismatch");
  if (stem.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(stem.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + stem.parent_path().string() + ": " + ec.message());
  }

  std::ofstream bin(container_data_path(stem), std::ios::binary | std::ios::trunc);
  if (!bin) throw Error(ErrorCode::IoError, "cannot open " + container_data_path(stem).string());
  for (double v : data) put_le(bin, v);
  if (!bin) throw Error(ErrorCode::IoError, "write failed: " + container_data_path(stem).string());

  json meta = {
      {"format", "f64-le"},
      {"kind", header.kind},
      {"dim", header.grid.dim()},
      {"points_per_axis", header.grid.points_per_axis()},
      {"box_length", header.grid.box_length()},
      {"values_per_node", header.values_per_node},
      {"layout", header.layout},
      {"count", data.size()},
      {"tags", header.tags},
      {"numbers", header.numbers},
  };
  if (header.seed) meta["seed"] = *header.seed;
  std::ofstream side(container_sidecar_path(stem), std::ios::trunc);
  if (!side) throw Error(ErrorCode::IoError, "cannot open " + container_sidecar_path(stem).string());
  side << meta.dump(2) << '\n';
}

Container read_container(const fs::path& stem) {
  std::ifstream side(container_sidecar_path(stem));
  if (!side) throw Error(ErrorCode::IoError, "cannot open " + container_sidecar_path(stem).string());
  Container c;
  std::size_t count = 0;
  try {
    const json meta = json::parse(side);
    if (meta.at("format") != "f64-le") throw Error(ErrorCode::IoError, "unsupported container format");
    c.header.kind = meta.at("kind").get<std::string>();
    c.header.grid = SpatialGrid(meta.at("dim").get<int>(), meta.at("points_per_axis").get<int>(),
                                meta.at("box_length").get<double>());
    c.header.values_per_node = meta.at("values_per_node").get<int>();
    c.header.layout = meta.at("layout").get<std::string>();
    c.header.tags = meta.value("tags", std::map<std::string, std::string>{});
    c.header.numbers = meta.value("numbers", std::map<std::string, double>{});
    if (meta.contains("seed")) c.header.seed = meta.at("seed").get<std::uint64_t>();
    count = meta.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed sidecar: ") + e.what());
  }
  if (count != c.header.grid.size() * static_cast<std::size_t>(c.header.values_per_node)) {
    throw Error(ErrorCode::IoError, "sidecar count disagrees with grid");
  }

  std::ifstream bin(container_data_path(stem), std::ios::binary);
  if (!bin) throw Error(ErrorCode::IoError, "cannot open " + container_data_path(stem).string());
  std::vector<unsigned char> raw(count * 8);
  bin.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (bin.gcount() != static_cast<std::streamsize>(raw.size()) || bin.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::IoError, "payload length mismatch in " + container_data_path(stem).string());
  }
  c.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) c.data[i] = get_le(raw.data() + 8 * i);
  return c;
}

void save_strength(const fs::path& stem, const StrengthField& strength, const CheckedSource* source) {
  ContainerHeader h;
  h.kind = "strength";
  h.grid = strength.grid();
  const int d = h.grid.dim();
  std::vector<double> data;
  if (strength.is_matrix()) {
    h.values_per_node = d * d;
    h.tags["rank"] = "matrix";
    data.reserve(h.grid.size() * static_cast<std::size_t>(d * d));
    for (const auto& a : strength.matrix_values()) {
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) data.push_back(a(r, c));
    }
  } else {
    h.tags["rank"] = "scalar";
    const auto v = strength.scalar_values();
    data.assign(v.begin(), v.end());
  }
  if (source) {
    h.tags["model"] = std::string(to_string(source->model().kind()));
    h.numbers["m"] = source->spec().m;
    h.numbers["s"] = source->spec().s;
    h.numbers["n"] = source->model().order();
  }
  write_container(stem, h, data);
}

StrengthField load_strength(const fs::path& stem) {
  auto c = read_container(stem);
  if (c.header.kind != "strength") throw Error(ErrorCode::IoError, "container is not a strength field");
  const auto& grid = c.header.grid;
  const int d = grid.dim();
  if (c.header.tags["rank"] == "matrix") {
    if (c.header.values_per_node != d * d) throw Error(ErrorCode::IoError, "matrix strength needs d*d values per node");
    std::vector<RMat3> mats(grid.size(), RMat3::Zero());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (int r = 0; r < d; ++r)
        for (int col = 0; col < d; ++col) mats[i](r, col) = c.data[i * static_cast<std::size_t>(d * d) + r * d + col];
    }
    return StrengthField::matrix(grid, std::move(mats));
  }
  if (c.header.values_per_node != 1) throw Error(ErrorCode::IoError, "scalar strength needs one value per node");
  return StrengthField::scalar(grid, std::move(c.data));
}

void save_realization(const fs::path& stem, const FieldRealization& f) {
  ContainerHeader h;
  h.kind = "realization";
  h.grid = f.grid;
  h.values_per_node = f.components;
  h.layout = "component-major";
  h.numbers["m"] = f.m;
  h.seed = f.seed;
  write_container(stem, h, f.values);
}

FieldRealization load_realization(const fs::path& stem) {
  auto c = read_container(stem);
  if (c.header.kind != "realization") throw Error(ErrorCode::IoError, "container is not a realization");
  FieldRealization f{c.header.grid, c.header.values_per_node, std::move(c.data), c.header.seed.value_or(0),
                     c.header.numbers.count("m") ? c.header.numbers.at("m") : 0.0};
  return f;
}

}  // namespace stochinv
