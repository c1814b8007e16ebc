#include "exsim/map_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace exsim {

namespace {

constexpr char kMagic[6] = {'E', 'X', 'T', 'S', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("map dump: truncated file");
  return value;
}

}  // namespace

void write_ply(const std::vector<Vec3>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_ply: cannot open " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char line[96];
  for (const Vec3& p : points) {
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f\n", p.x(), p.y(), p.z());
    out << line;
  }
}

std::vector<Vec3> read_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_ply: cannot open " + path);
  std::string token;
  std::size_t count = 0;
  while (in >> token) {
    if (token == "vertex") {
      in >> count;
    } else if (token == "end_header") {
      break;
    }
  }
  std::vector<Vec3> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 p;
    if (!(in >> p.x() >> p.y() >> p.z())) throw std::runtime_error("read_ply: truncated file");
    points.push_back(p);
  }
  return points;
}

void write_map_dump(const VoxelMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_map_dump: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kVersion);
  write_raw(out, static_cast<float>(map.resolution()));
  for (int a = 0; a < 3; ++a) write_raw(out, static_cast<std::int32_t>(map.dims()[a]));
  for (int a = 0; a < 3; ++a) write_raw(out, static_cast<float>(map.origin()[a]));
  write_raw(out, static_cast<float>(map.truncation()));
  write_raw(out, static_cast<float>(map.known_threshold()));
  const std::size_t n = map.cell_count();
  for (std::size_t i = 0; i < n; ++i) {
    write_raw(out, static_cast<float>(map.voxel(i).sdf));
    write_raw(out, static_cast<float>(map.voxel(i).weight));
  }
}

VoxelMap read_map_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_map_dump: cannot open " + path);
  char magic[6];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("read_map_dump: bad magic");
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("read_map_dump: unsupported version");
  const auto resolution = read_raw<float>(in);
  Eigen::Vector3i dims;
  for (int a = 0; a < 3; ++a) dims[a] = read_raw<std::int32_t>(in);
  Vec3 origin;
  for (int a = 0; a < 3; ++a) origin[a] = read_raw<float>(in);
  const auto truncation = read_raw<float>(in);
  const auto tau_w = read_raw<float>(in);

  VoxelMapConfig config;
  config.resolution = resolution;
  config.truncation_scale = truncation / resolution;
  config.known_threshold = tau_w;
  VoxelMap map(origin, dims, config);
  const std::size_t n = map.cell_count();
  for (std::size_t i = 0; i < n; ++i) {
    const auto sdf = read_raw<float>(in);
    const auto weight = read_raw<float>(in);
    map.voxel_mutable(i) = TsdfVoxel{sdf, weight};
  }
  return map;
}

}  // namespace exsim
