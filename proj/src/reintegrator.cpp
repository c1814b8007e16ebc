#include "exsim/reintegrator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace exsim {

int Reintegrator::on_rectification(const RectificationEvent& event, FrameStore& frames,
                                   const std::function<bool(int)>& is_keyframe) {
  for (const auto& [id, pose] : event.corrected) {
    if (!frames.contains(id))
      throw std::invalid_argument("on_rectification: unknown frame id " + std::to_string(id));
    (void)pose;
  }

  int enqueued = 0;
  for (const auto& [id, pose] : event.corrected) {
    Frame& frame = frames.at(id);
    const double dpos = (pose.position - frame.pose.position).norm();
    const double dyaw = yaw_distance(pose.yaw, frame.pose.yaw);
    if (dpos <= config_.position_epsilon && dyaw <= config_.yaw_epsilon) continue;

    frame.pose = pose;
    ++frame.pose_version;

    if (!is_keyframe(id) || !frame.integrated()) continue;

    auto it = pending_index_.find(id);
    if (it != pending_index_.end()) {
      // Replacement rule: retarget the pending entry, keep its old-pose
      // snapshot and queue position.
      queue_[it->second].new_pose = pose;
    } else {
      ReintegrationTask task;
      task.frame_id = id;
      task.old_pose = *frame.integrated_with;
      task.new_pose = pose;
      task.order = next_order_++;
      pending_index_[id] = queue_.size();
      queue_.push_back(task);
    }
    ++enqueued;
  }
  return enqueued;
}

std::vector<ExecutedTask> Reintegrator::tick(VoxelMap& map, FrameStore& frames, int robot_block,
                                             const BlockPartition& partition, int budget) {
  std::vector<ExecutedTask> executed;
  if (queue_.empty() || budget < 1) return executed;

  // Split by priority, preserving FIFO order within each class.
  std::vector<std::size_t> priority, rest;
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    const Frame& frame = frames.at(queue_[i].frame_id);
    const int block = partition.block_of(frame.pose.position);
    if (partition.is_neighbor(block, robot_block))
      priority.push_back(i);
    else
      rest.push_back(i);
  }

  std::vector<std::size_t> taken;
  std::vector<bool> consumed(queue_.size(), false);
  auto run = [&](const std::vector<std::size_t>& order) {
    for (std::size_t i : order) {
      if (static_cast<int>(executed.size()) >= budget) break;
      ReintegrationTask& task = queue_[i];
      Frame& frame = frames.at(task.frame_id);
      consumed[i] = true;
      taken.push_back(i);
      if (!frame.integrated()) continue;  // pruned while waiting; stale
      map.deintegrate_frame(frame);
      // Re-integrate at the frame's current pose; integrated_with snapshots
      // exactly the pose used.
      map.integrate_frame(frame);
      const bool was_priority =
          partition.is_neighbor(partition.block_of(frame.pose.position), robot_block);
      executed.push_back({task.frame_id, was_priority});
      ++total_executed_;
    }
  };
  run(priority);
  run(rest);

  if (!taken.empty()) {
    std::vector<ReintegrationTask> remaining;
    remaining.reserve(queue_.size() - taken.size());
    for (std::size_t i = 0; i < queue_.size(); ++i)
      if (!consumed[i]) remaining.push_back(std::move(queue_[i]));
    queue_ = std::move(remaining);
    pending_index_.clear();
    for (std::size_t i = 0; i < queue_.size(); ++i) pending_index_[queue_[i].frame_id] = i;
  }
  return executed;
}

}  // namespace exsim
