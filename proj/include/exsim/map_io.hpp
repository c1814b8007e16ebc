#pragma once

#include <string>
#include <vector>

#include "exsim/voxel_map.hpp"

namespace exsim {

// ASCII PLY point cloud (x y z per vertex).
void write_ply(const std::vector<Vec3>& points, const std::string& path);
std::vector<Vec3> read_ply(const std::string& path);

// Versioned binary map dump. Header: magic "EXTSDF", u32 version, f32
// resolution, i32 dims[3], f32 origin[3], f32 truncation, f32 tau_w.
// Payload: dims.x*dims.y*dims.z (sdf, weight) pairs, x-fastest,
// little-endian 32-bit floats.
void write_map_dump(const VoxelMap& map, const std::string& path);
VoxelMap read_map_dump(const std::string& path);

}  // namespace exsim
