#pragma once

#include <optional>
#include <string>
#include <vector>

#include "exsim/atsp.hpp"
#include "exsim/kdtree.hpp"
#include "exsim/pathing.hpp"
#include "exsim/voxel_map.hpp"

namespace exsim {

// Connected component of frontier cells: Known free cells 6-adjacent to at
// least one not-yet-Known cell.
struct FrontierCluster {
  int id = -1;
  std::vector<Eigen::Vector3i> cells;
  Vec3 centroid{0.0, 0.0, 0.0};
  Pose4 viewpoint;  // member cell nearest the centroid, yaw facing the unknown mass
};

struct FrontierConfig {
  int min_cluster_size = 5;
};

std::vector<FrontierCluster> extract_frontiers(const VoxelMap& map,
                                               const FrontierConfig& config = {});

// Consecutive historical viewpoints grouped along the flight path.
struct ViewpointCluster {
  int id = -1;
  std::vector<Pose4> members;
  std::vector<int> member_indices;  // global viewpoint indices, ascending
  int center_member = 0;            // member nearest the member centroid
  int first_index = 0;
  int last_index = 0;

  const Pose4& center() const { return members[static_cast<std::size_t>(center_member)]; }
};

// Cluster set plus a KD-tree over all member positions for range queries.
struct ViewpointHistory {
  std::vector<ViewpointCluster> clusters;
  KdTree3 tree;                    // over member positions, in path order
  std::vector<int> member_cluster; // tree index -> cluster id
};

ViewpointHistory cluster_history(const std::vector<Pose4>& path, int cap, double radius);

// Loop-closure sites temporarily excluded after a failed visit.
class CooldownList {
 public:
  void add(const Vec3& position, double until_time) { entries_.push_back({position, until_time}); }
  bool blocked(const Vec3& position, double now, double radius) const {
    for (const auto& e : entries_)
      if (now < e.until && (position - e.position).norm() <= radius) return true;
    return false;
  }

 private:
  struct Entry {
    Vec3 position;
    double until;
  };
  std::vector<Entry> entries_;
};

struct LoopCandidate {
  int cluster_id = -1;
  Pose4 center;
  double cost = 0.0;  // move_cost from the query state to the center viewpoint
};

struct ExplorerConfig {
  double epsilon = 0.2;          // detour tolerance of the loop/frontier decision
  double candidate_range = 5.0;  // search radius for historical viewpoints
  int cluster_cap = 10;
  double cluster_radius = 3.0;
  double detach_timeout = 10.0;
  double cooldown = 30.0;
  int min_gap = 50;  // candidate members must be at least this many viewpoints old
  double v_max = 2.0;
  double yaw_rate_max = 0.9;
};

// Cheapest in-range historical cluster, skipping clusters on cooldown and
// clusters too recent to count as a revisit.
std::optional<LoopCandidate> select_loop_candidate(const Pose4& state,
                                                   const ViewpointHistory& history,
                                                   const PlanGrid& grid,
                                                   const ExplorerConfig& config,
                                                   const CooldownList& cooldowns, double now,
                                                   int current_viewpoint_index);

// M_frt rows/columns: 0 = current state, 1..n = frontier viewpoints. M_loop
// is M_frt with row 0 rebuilt from the candidate's center viewpoint.
struct TourMatrices {
  CostMatrix frontier;
  std::optional<CostMatrix> loop;
};

TourMatrices build_matrices(const Pose4& state, const std::vector<FrontierCluster>& frontiers,
                            const std::optional<LoopCandidate>& candidate, const PlanGrid& grid,
                            const ExplorerConfig& config);

// Outcome of one global planning cycle.
struct PlanRecord {
  int frontier_count = 0;
  int candidate_cluster = -1;  // -1: no candidate considered
  double cost_frontier = 0.0;
  double cost_loop = -1.0;  // -1: not computed
  double epsilon = 0.2;
  bool chose_loop = false;
  Tour tour;              // over frontier indices (matrix labeling)
  std::string solver;
  bool feasible = true;
};

// Plans the global tour and applies the detour rule: the loop tour is taken
// iff C_loop <= (1 + epsilon) * C_frt, where C_loop includes the approach
// cost to the candidate.
PlanRecord plan_global_tour(const Pose4& state, const std::vector<FrontierCluster>& frontiers,
                            const std::optional<LoopCandidate>& candidate, const PlanGrid& grid,
                            const ExplorerConfig& config);

// True when an in-progress loop-closure visit has waited longer than the
// timeout without a detected closure; the site then goes on cooldown.
bool detach_check(double elapsed, double timeout, bool closure_detected);

}  // namespace exsim
