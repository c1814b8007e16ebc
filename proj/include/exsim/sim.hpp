#pragma once

#include <optional>
#include <string>
#include <vector>

#include "exsim/explorer.hpp"
#include "exsim/kdtree.hpp"
#include "exsim/pathing.hpp"
#include "exsim/pruner.hpp"
#include "exsim/reintegrator.hpp"
#include "exsim/rng.hpp"
#include "exsim/scenario.hpp"
#include "exsim/voxel_map.hpp"

namespace exsim {

// Per-cycle Gaussian odometry noise, per the s1..s4 presets. mu are biases
// (m/s, rad/s), var are the variances of the per-cycle noise velocities.
struct DriftModel {
  std::string level = "s1";
  double mu_xyz = 0.0;
  double var_xyz = 0.0;
  double mu_yaw = 0.0;
  double var_yaw = 0.0;
  double update_hz = 200.0;

  static DriftModel preset(const std::string& level);
};

struct PoseDelta {
  Vec3 dpos{0.0, 0.0, 0.0};
  double dyaw = 0.0;
};

// One odometry cycle: the true motion plus bias and Gaussian noise
// accumulated over dt. Draw order is fixed (x, y, z, yaw) so sequences are
// reproducible for a given stream.
PoseDelta step_drift(const DriftModel& model, Rng& rng, double dt, const PoseDelta& true_delta);

struct ClosureThresholds {
  double distance = 0.5;  // d_close, meters between true positions
  double yaw = 0.5;       // theta_close, rad (co-visibility proxy)
  int min_gap = 50;       // viewpoints between revisit and original
};

// Match for the current true viewpoint among strictly older history:
// within distance, within yaw, at least min_gap viewpoints old. Nearest
// eligible wins, ties to the lowest index.
std::optional<int> find_closure(const Pose4& current_true, int current_index,
                                const std::vector<Pose4>& history, const KdTree3& tree,
                                const ClosureThresholds& thresholds);

// Proximity oracle over true poses; fires at most once per visit.
class ClosureDetector {
 public:
  explicit ClosureDetector(const ClosureThresholds& thresholds) : thresholds_(thresholds) {}

  // Registers the viewpoint and reports a match, if any.
  std::optional<int> check_and_add(const Pose4& true_pose);
  int viewpoint_count() const { return static_cast<int>(history_.size()); }

 private:
  void refresh_tree();

  ClosureThresholds thresholds_;
  std::vector<Pose4> history_;
  KdTree3 tree_;
  std::size_t indexed_ = 0;
  std::optional<Vec3> active_visit_;  // matched position; re-arms once left
};

// Kinematic leg executor: follows a polyline with an exact trapezoidal speed
// profile while slewing yaw toward the leg's terminal yaw.
class Navigator {
 public:
  void begin(std::vector<Vec3> polyline, double target_yaw, double start_yaw,
             const MotionLimits& limits);
  bool active() const { return active_; }
  void abort() { active_ = false; }
  // Next pose, dt seconds later. Marks the leg done when both the path and
  // the yaw are finished.
  Pose4 advance(double dt);
  const std::vector<Vec3>& polyline() const { return polyline_; }
  double progress() const { return s_; }

 private:
  Vec3 position_at(double s) const;

  std::vector<Vec3> polyline_;
  std::vector<double> cumulative_;
  double total_length_ = 0.0;
  double target_yaw_ = 0.0;
  double yaw_ = 0.0;
  MotionLimits limits_;
  double s_ = 0.0;
  double t_ = 0.0;
  bool active_ = false;
};

// Full pose sequence for one leg at the cycle rate; nullopt when no
// collision-free path exists.
std::optional<std::vector<Pose4>> navigate(const MotionLimits& limits, const Pose4& from,
                                           const Pose4& target, const PlanGrid& grid, double dt);

enum class MapperMode { Reintegration, Naive };

struct SimConfig {
  // planner
  double epsilon = 0.2;
  bool alc = true;
  double candidate_range = 5.0;
  int cluster_cap = 10;
  double cluster_radius = 3.0;
  double detach_timeout = 10.0;
  double cooldown = 30.0;
  int min_frontier_cluster = 5;
  // pruning
  bool pruning = true;
  int n_ob = 2;
  int tau_gain = -1;  // -1 derives 10 / sigma_scp
  double scp_resolution = -1.0;  // -1 derives 2 * map_resolution
  double block_edge = 5.0;
  // mapping
  MapperMode mapper = MapperMode::Reintegration;
  double map_resolution = 0.1;
  double truncation_scale = 4.0;
  double tau_w = 0.5;
  WeightPolicy weight_policy = WeightPolicy::DepthScaled;
  int reintegration_budget = 3;
  // closure oracle
  ClosureThresholds closure;
  // rates and budgets
  double odom_hz = 200.0;
  double frame_hz = 10.0;
  double sim_time_budget = 400.0;
  double wall_clock_budget = 1e9;
  // navigation
  double clearance = 0.15;
  int plan_coarsen = 2;
  double robot_radius = 0.2;
  // evaluation support
  bool capture_closure_rmse = false;
  double gt_spacing = 0.05;
  std::uint64_t seed = 0;

  int effective_tau_gain(double scp_res) const {
    return tau_gain >= 0 ? tau_gain : static_cast<int>(std::lround(10.0 / scp_res));
  }
  double effective_scp_resolution() const {
    return scp_resolution > 0.0 ? scp_resolution : 2.0 * map_resolution;
  }
};

struct ClosureRecord {
  double t = 0.0;
  int current_viewpoint = -1;
  int matched_viewpoint = -1;
  int frames_corrected = 0;
};

struct ReintegrationRecord {
  std::int64_t cycle = 0;
  int frame_id = -1;
  bool was_priority = false;
};

struct TrajectorySample {
  double t = 0.0;
  Pose4 truth;
  Pose4 drifted;
  Pose4 rectified;
};

struct RunResult {
  explicit RunResult(VoxelMap final_map) : map(std::move(final_map)) {}

  VoxelMap map;
  bool complete = false;
  double exploration_time = 0.0;
  double flight_distance = 0.0;
  int total_frames = 0;
  int keyframe_count = 0;
  std::vector<ClosureRecord> closures;
  std::vector<ReintegrationRecord> reintegrations;
  std::vector<PlanRecord> plans;
  std::vector<KeyframeSelectionRecord> pruning_log;
  std::vector<TrajectorySample> trajectory;
  // RMSE right before the last rectification was applied and after the
  // queue drained; -1 when capture_closure_rmse is off or no closure fired.
  double rmse_before_last_closure = -1.0;
  double rmse_after_drain = -1.0;
  std::string scenario_name;
  std::string drift_level;
};

RunResult run_exploration(const Scenario& scenario, const DriftModel& drift,
                          const SimConfig& config);

}  // namespace exsim
