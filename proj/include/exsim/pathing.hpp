#pragma once

#include <optional>
#include <vector>

#include "exsim/voxel_map.hpp"

namespace exsim {

// Cost assigned to unreachable pairs; any tour containing such a leg is
// infeasible and the corresponding entity is skipped for the cycle.
inline constexpr double kUnreachableCost = 1e6;

// Coarse traversability snapshot of a VoxelMap for path queries. A cell is
// free when the underlying map cell at its center is Known with sdf above
// the clearance margin.
class PlanGrid {
 public:
  PlanGrid(const VoxelMap& map, int coarsen_factor, double clearance);

  double resolution() const { return resolution_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  std::uint64_t map_version() const { return map_version_; }

  bool in_bounds(const Eigen::Vector3i& idx) const {
    return idx.x() >= 0 && idx.y() >= 0 && idx.z() >= 0 && idx.x() < dims_.x() &&
           idx.y() < dims_.y() && idx.z() < dims_.z();
  }
  int linear_index(const Eigen::Vector3i& idx) const {
    return idx.x() + dims_.x() * (idx.y() + dims_.y() * idx.z());
  }
  Eigen::Vector3i cell_of(const Vec3& p) const;
  Vec3 cell_center(const Eigen::Vector3i& idx) const;
  bool free_cell(const Eigen::Vector3i& idx) const {
    return in_bounds(idx) && free_[static_cast<std::size_t>(linear_index(idx))];
  }

  // Nearest free cell to p within a small search radius (deterministic scan
  // order); nullopt when everything nearby is blocked.
  std::optional<Eigen::Vector3i> snap_free(const Vec3& p, int max_ring = 2) const;

  // A* shortest path (26-connectivity, Euclidean edge weights) between the
  // cells containing a and b. Returns the polyline of cell centers with a
  // and b substituted at the ends, or nullopt when unreachable.
  std::optional<std::vector<Vec3>> shortest_path(const Vec3& a, const Vec3& b) const;

  // Geodesic lengths from src to each target over free cells; unreachable
  // targets get kUnreachableCost. One Dijkstra sweep, early-exits once all
  // targets are settled.
  std::vector<double> path_lengths(const Vec3& src, const std::vector<Vec3>& targets) const;

 private:
  Vec3 origin_;
  Eigen::Vector3i dims_;
  double resolution_;
  std::vector<bool> free_;
  std::uint64_t map_version_ = 0;
};

// Time lower bound to move between two viewpoints: the slower of translating
// the collision-free shortest path at v_max and turning the wrapped yaw
// difference at yaw_rate_max. Unreachable pairs cost kUnreachableCost.
double move_cost(const Pose4& a, const Pose4& b, double v_max, double yaw_rate_max,
                 const PlanGrid& grid);

}  // namespace exsim
