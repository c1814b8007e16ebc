#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "exsim/voxel_map.hpp"

namespace exsim {

// Sensor frustum used for coverage checks.
struct SensorFov {
  double fov_h_deg = 80.0;
  double fov_v_deg = 60.0;
  double max_range = 4.5;
};

// Coarse visibility-counting grid for the set-cover formulation. Counters
// start at n_ob and only ever decrease; a cell is covered once its counter
// reaches zero.
class ScpGrid {
 public:
  ScpGrid(const Vec3& origin, const Eigen::Vector3i& dims, double resolution);
  static ScpGrid from_bounds(const Aabb& bounds, double resolution);

  double resolution() const { return resolution_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  const Vec3& origin() const { return origin_; }
  std::size_t cell_count() const { return counters_.size(); }

  bool in_bounds(const Eigen::Vector3i& idx) const {
    return idx.x() >= 0 && idx.y() >= 0 && idx.z() >= 0 && idx.x() < dims_.x() &&
           idx.y() < dims_.y() && idx.z() < dims_.z();
  }
  int linear_index(const Eigen::Vector3i& idx) const {
    return idx.x() + dims_.x() * (idx.y() + dims_.y() * idx.z());
  }
  Eigen::Vector3i cell_of(const Vec3& p) const;
  Vec3 cell_center(int linear) const;

  int counter(int cell) const { return counters_[static_cast<std::size_t>(cell)]; }
  bool covered(int cell) const { return counters_[static_cast<std::size_t>(cell)] == 0; }
  void reset_cells(std::span<const int> cells, int n_ob);
  void decrement(int cell) {
    auto& c = counters_[static_cast<std::size_t>(cell)];
    if (c > 0) --c;
  }

 private:
  Vec3 origin_;
  Eigen::Vector3i dims_;
  double resolution_;
  std::vector<std::int16_t> counters_;
};

// Scp-grid cells a frame observes: centers inside the yaw-oriented view
// frustum, within range, and not occluded by the frame's own point cloud.
std::vector<int> covered_cells(const Frame& frame, const ScpGrid& grid, const SensorFov& fov);

// Coverage bookkeeping for one frame inside the set-cover solver.
struct FrameCoverage {
  int frame_id = -1;
  std::vector<int> cells;  // sorted unique scp cell indices
  double cost = 1.0;
  bool selected = false;
  int n_all = 0;
  int n_covered = 0;
  int n_new = 0;
  int pose_version = 0;
};

// Cost effectiveness alpha = c_f / n_new. A frame with zero gain carries no
// alpha and is excluded from the argmin.
std::optional<double> cost_effectiveness(const FrameCoverage& coverage);

// Modified greedy set cover over one block's frames. Counters for every cell
// referenced by the block are re-initialized to n_ob first; selection stops
// when the best remaining gain is <= tau_gain. Returns frame ids in
// selection order (ties in the argmin go to the lowest frame id).
std::vector<int> select_keyframes(std::vector<FrameCoverage*>& frames, ScpGrid& grid,
                                  int tau_gain, int n_ob);

struct ScpBlock {
  int id = -1;
  Aabb bounds;
  std::vector<int> frame_ids;  // ascending
  bool dirty = false;
  std::vector<int> keyframes;  // selection order
};

// Equal-size axis-aligned partition of the map bounds.
class BlockPartition {
 public:
  BlockPartition() = default;
  BlockPartition(const Aabb& bounds, double edge_length);

  int block_of(const Vec3& p) const;
  const Eigen::Vector3i& dims() const { return dims_; }
  int block_count() const { return dims_.x() * dims_.y() * dims_.z(); }
  Aabb block_bounds(int id) const;
  // 26-connected neighbourhood, including the block itself.
  bool is_neighbor(int a, int b) const;

 private:
  Vec3 origin_;
  Eigen::Vector3i dims_{0, 0, 0};
  double edge_ = 1.0;
};

struct PrunerConfig {
  double scp_resolution = 0.2;  // sigma_scp = 2 * sigma_map
  double block_edge = 5.0;
  int n_ob = 2;
  int tau_gain = 50;  // ~10 / sigma_scp
  SensorFov fov;
};

struct KeyframeSelectionRecord {
  int block_id = 0;
  int frame_id = 0;
  int selection_rank = 0;
  int n_new_at_selection = 0;
};

// Incremental per-block set-cover pruner. Frames are attached to the block
// containing their camera position; only dirty blocks are re-solved.
class FramePruner {
 public:
  FramePruner(const Aabb& map_bounds, const PrunerConfig& config);

  const PrunerConfig& config() const { return config_; }
  const BlockPartition& partition() const { return partition_; }
  const ScpGrid& grid() const { return grid_; }

  // Computes the frame's coverage and marks its block dirty.
  void add_frame(const Frame& frame);
  // Recomputes coverage after a pose rectification; the frame may migrate
  // to a different block, in which case both blocks become dirty.
  void on_pose_rectified(const Frame& frame);

  // Re-solves dirty blocks only. Returns the ids of re-solved blocks; when
  // provided, `added`/`removed` receive the keyframe-set delta (ascending).
  std::vector<int> solve_dirty(std::vector<int>* added = nullptr,
                               std::vector<int>* removed = nullptr);

  bool is_keyframe(int frame_id) const;
  std::vector<int> all_keyframes() const;  // ascending
  const ScpBlock& block(int id) const { return blocks_.at(static_cast<std::size_t>(id)); }
  int tracked_frames() const { return static_cast<int>(coverage_.size()); }

  const std::vector<KeyframeSelectionRecord>& selection_log() const { return selection_log_; }

 private:
  void solve_block(ScpBlock& block);

  PrunerConfig config_;
  BlockPartition partition_;
  ScpGrid grid_;
  std::vector<ScpBlock> blocks_;
  std::unordered_map<int, FrameCoverage> coverage_;
  std::unordered_map<int, int> frame_block_;
  std::unordered_map<int, bool> keyframe_flag_;
  std::vector<KeyframeSelectionRecord> selection_log_;
};

}  // namespace exsim
