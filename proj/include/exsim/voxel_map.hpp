#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "exsim/geometry.hpp"

namespace exsim {

enum class WeightPolicy { Constant, DepthScaled };

enum class VoxelState { Unobserved, Unknown, Known };

struct TsdfVoxel {
  double sdf = 0.0;
  double weight = 0.0;
};

struct IntegrationStats {
  std::int64_t voxels_touched = 0;
  std::int64_t rays_cast = 0;
};

// One depth measurement: a point cloud in camera coordinates plus the
// 4-DOF pose it is believed to have been taken from. `integrated_with`
// snapshots the exact pose used at integration time; de-integration always
// replays that snapshot, never the current (possibly rectified) pose.
struct Frame {
  int id = -1;
  Pose4 pose;
  int pose_version = 0;
  std::vector<Vec3> points;
  std::optional<Pose4> integrated_with;

  bool integrated() const { return integrated_with.has_value(); }
};

// Frames indexed by their monotone id.
class FrameStore {
 public:
  int add(Frame frame) {
    frame.id = static_cast<int>(frames_.size());
    frames_.push_back(std::move(frame));
    return frames_.back().id;
  }
  Frame& at(int id) { return frames_.at(static_cast<std::size_t>(id)); }
  const Frame& at(int id) const { return frames_.at(static_cast<std::size_t>(id)); }
  bool contains(int id) const { return id >= 0 && id < static_cast<int>(frames_.size()); }
  int size() const { return static_cast<int>(frames_.size()); }

 private:
  std::deque<Frame> frames_;
};

struct VoxelMapConfig {
  double resolution = 0.1;          // sigma_map, meters per cell
  double truncation_scale = 4.0;    // t; truncation delta = t * resolution
  double known_threshold = 0.5;     // tau_w, > 0
  WeightPolicy weight_policy = WeightPolicy::DepthScaled;
};

// Truncated signed distance along a ray: length difference between the
// camera->surface vector and the camera->V vector, V being the voxel
// center's orthogonal projection onto the ray. Clamped to [-delta, delta].
// Throws std::invalid_argument on a degenerate (zero-length) ray.
double compute_sdf(const Vec3& camera, const Vec3& surface, const Vec3& voxel_center,
                   double truncation);

// Integration weight for an observation at depth z with the given (already
// truncated) sdf. Throws std::invalid_argument when z <= 0.
double compute_weight(double z, double sdf, double truncation, double resolution,
                      WeightPolicy policy);

// Dense reversible TSDF volume with fixed, pre-declared bounds.
class VoxelMap {
 public:
  // De-integration can leave tiny residual weights from rounding; weights at
  // or below this floor reset the voxel to Unobserved.
  static constexpr double kWeightFloor = 1e-9;

  VoxelMap(const Vec3& origin, const Eigen::Vector3i& dims, const VoxelMapConfig& config);
  static VoxelMap from_bounds(const Aabb& bounds, const VoxelMapConfig& config);

  double resolution() const { return config_.resolution; }
  double truncation() const { return truncation_; }
  double known_threshold() const { return config_.known_threshold; }
  const VoxelMapConfig& config() const { return config_; }
  const Vec3& origin() const { return origin_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  Aabb bounds() const;
  std::size_t cell_count() const { return voxels_.size(); }

  bool in_bounds(const Eigen::Vector3i& idx) const {
    return idx.x() >= 0 && idx.y() >= 0 && idx.z() >= 0 && idx.x() < dims_.x() &&
           idx.y() < dims_.y() && idx.z() < dims_.z();
  }
  // x-fastest linear index.
  std::size_t linear_index(const Eigen::Vector3i& idx) const {
    return static_cast<std::size_t>(idx.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(idx.y()) +
                static_cast<std::size_t>(dims_.y()) * static_cast<std::size_t>(idx.z()));
  }
  Eigen::Vector3i cell_of(const Vec3& p) const;
  Vec3 cell_center(const Eigen::Vector3i& idx) const;

  const TsdfVoxel& voxel(const Eigen::Vector3i& idx) const { return voxels_[linear_index(idx)]; }
  const TsdfVoxel& voxel(std::size_t linear) const { return voxels_[linear]; }
  TsdfVoxel& voxel_mutable(std::size_t linear) { return voxels_[linear]; }

  VoxelState state(const Eigen::Vector3i& idx) const;
  VoxelState state(std::size_t linear) const;

  // Casts one ray per point from the frame pose and applies the weighted
  // average TSDF update to every traversed in-band voxel. Throws
  // std::logic_error when the frame is already integrated.
  IntegrationStats integrate_frame(Frame& frame);

  // Exact algebraic reversal of integrate_frame along the identical rays,
  // using the frame's integrated_with pose snapshot. Throws std::logic_error
  // when the frame is not integrated.
  IntegrationStats deintegrate_frame(Frame& frame);

  // Zero-crossing points of the sdf along axis-aligned edges between Known
  // voxels of opposite sign, deduplicated on a grid of the given spacing.
  std::vector<Vec3> sample_iso_surface(double spacing) const;

  // Monotone counter bumped on every write; readers holding a version can
  // detect staleness (snapshot-read contract).
  std::uint64_t version() const { return version_; }

  bool operator==(const VoxelMap& other) const;

 private:
  enum class Direction { Integrate, Deintegrate };
  IntegrationStats apply_frame(const Pose4& pose, const std::vector<Vec3>& points,
                               Direction direction);

  VoxelMapConfig config_;
  double truncation_ = 0.0;
  Vec3 origin_{0.0, 0.0, 0.0};
  Eigen::Vector3i dims_{0, 0, 0};
  std::vector<TsdfVoxel> voxels_;
  std::uint64_t version_ = 0;
};

// Classifies a voxel per the weight threshold: weight 0 is Unobserved,
// 0 < w <= tau_w is Unknown, w > tau_w is Known. Throws on tau_w <= 0.
VoxelState voxel_state(const TsdfVoxel& voxel, double known_threshold);

}  // namespace exsim
