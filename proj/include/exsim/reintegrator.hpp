#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <vector>

#include "exsim/pruner.hpp"
#include "exsim/voxel_map.hpp"

namespace exsim {

// Pose corrections produced by a loop closure. Only frames whose pose
// actually moved (beyond the epsilons below) belong in the map.
struct RectificationEvent {
  std::map<int, Pose4> corrected;  // frame id -> rectified pose
  int trigger_viewpoint = -1;
  double timestamp = 0.0;
};

struct ReintegrationTask {
  int frame_id = -1;
  Pose4 old_pose;  // integrated_with snapshot at enqueue time
  Pose4 new_pose;
  std::uint64_t order = 0;  // FIFO position
};

struct ExecutedTask {
  int frame_id = -1;
  bool was_priority = false;
};

struct ReintegratorConfig {
  int budget = 3;  // de-integrate/re-integrate pairs per cycle
  double position_epsilon = 1e-6;
  double yaw_epsilon = 1e-6;
};

// Waiting list between pose rectification and the mapping cycle. Corrections
// are applied as de-integrate-at-old-pose / re-integrate-at-new-pose pairs,
// at most `budget` per tick, frames near the robot first.
class Reintegrator {
 public:
  explicit Reintegrator(const ReintegratorConfig& config) : config_(config) {}

  const ReintegratorConfig& config() const { return config_; }

  // Applies an event: updates stored poses of all rectified frames and
  // enqueues keyframes that are currently integrated. A frame already
  // pending has its target pose replaced in place (old snapshot kept).
  // Returns the number of tasks enqueued or replaced. Throws
  // std::invalid_argument naming the offending id if any frame is unknown;
  // the event is then rejected as a whole.
  int on_rectification(const RectificationEvent& event, FrameStore& frames,
                       const std::function<bool(int)>& is_keyframe);

  // Executes up to `budget` pending pairs against the map. Tasks whose frame
  // sits in the robot's block or its 26-neighborhood run first (FIFO within
  // each class). Stale tasks (frame no longer integrated) are discarded
  // without consuming budget.
  std::vector<ExecutedTask> tick(VoxelMap& map, FrameStore& frames, int robot_block,
                                 const BlockPartition& partition, int budget);

  bool pending() const { return !queue_.empty(); }
  std::size_t queue_size() const { return queue_.size(); }
  std::int64_t total_executed() const { return total_executed_; }

 private:
  ReintegratorConfig config_;
  std::vector<ReintegrationTask> queue_;  // ordered by .order
  std::unordered_map<int, std::size_t> pending_index_;
  std::uint64_t next_order_ = 0;
  std::int64_t total_executed_ = 0;
};

}  // namespace exsim
