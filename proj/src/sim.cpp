#include "exsim/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "exsim/eval.hpp"

namespace exsim {

DriftModel DriftModel::preset(const std::string& level) {
  DriftModel m;
  m.level = level;
  if (level == "s1") {
    // all zeros
  } else if (level == "s2") {
    m.var_xyz = 2e-2;
    m.var_yaw = 2e-2;
  } else if (level == "s3") {
    m.var_xyz = 5e-2;
    m.mu_yaw = 1e-3;
    m.var_yaw = 5e-2;
  } else if (level == "s4") {
    m.var_xyz = 8e-2;
    m.mu_yaw = 1.5e-3;
    m.var_yaw = 8e-2;
  } else {
    throw std::invalid_argument("unknown drift level: " + level);
  }
  return m;
}

PoseDelta step_drift(const DriftModel& model, Rng& rng, double dt, const PoseDelta& true_delta) {
  const double sigma_xyz = std::sqrt(model.var_xyz);
  const double sigma_yaw = std::sqrt(model.var_yaw);
  PoseDelta out = true_delta;
  for (int a = 0; a < 3; ++a) out.dpos[a] += (model.mu_xyz + sigma_xyz * rng.normal()) * dt;
  out.dyaw += (model.mu_yaw + sigma_yaw * rng.normal()) * dt;
  return out;
}

std::optional<int> find_closure(const Pose4& current_true, int current_index,
                                const std::vector<Pose4>& history, const KdTree3& tree,
                                const ClosureThresholds& thresholds) {
  const std::vector<int> in_range = tree.radius(current_true.position, thresholds.distance);
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int idx : in_range) {
    if (idx > current_index - thresholds.min_gap) continue;
    const Pose4& vp = history[static_cast<std::size_t>(idx)];
    if (yaw_distance(current_true.yaw, vp.yaw) > thresholds.yaw) continue;
    const double d2 = (vp.position - current_true.position).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = idx;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

void ClosureDetector::refresh_tree() {
  std::vector<Vec3> positions;
  positions.reserve(history_.size());
  for (const auto& vp : history_) positions.push_back(vp.position);
  tree_ = KdTree3(std::move(positions));
  indexed_ = history_.size();
}

std::optional<int> ClosureDetector::check_and_add(const Pose4& true_pose) {
  const int current_index = static_cast<int>(history_.size());

  // Re-arm once the robot has left the previous match's neighborhood.
  if (active_visit_ &&
      (true_pose.position - *active_visit_).norm() > thresholds_.distance) {
    active_visit_.reset();
  }

  std::optional<int> match;
  if (!active_visit_) {
    if (history_.size() - indexed_ >= 32) refresh_tree();
    // Indexed portion via the tree, recent tail by linear scan.
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    auto consider = [&](int idx) {
      if (idx > current_index - thresholds_.min_gap) return;
      const Pose4& vp = history_[static_cast<std::size_t>(idx)];
      const double d2 = (vp.position - true_pose.position).squaredNorm();
      if (d2 > thresholds_.distance * thresholds_.distance) return;
      if (yaw_distance(true_pose.yaw, vp.yaw) > thresholds_.yaw) return;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = idx;
      }
    };
    if (!tree_.empty())
      for (int idx : tree_.radius(true_pose.position, thresholds_.distance)) consider(idx);
    for (std::size_t i = indexed_; i < history_.size(); ++i) consider(static_cast<int>(i));
    if (best >= 0) {
      match = best;
      active_visit_ = history_[static_cast<std::size_t>(best)].position;
    }
  }

  history_.push_back(true_pose);
  return match;
}

void Navigator::begin(std::vector<Vec3> polyline, double target_yaw, double start_yaw,
                      const MotionLimits& limits) {
  polyline_ = std::move(polyline);
  if (polyline_.empty()) polyline_.push_back(Vec3::Zero());
  cumulative_.assign(polyline_.size(), 0.0);
  for (std::size_t i = 1; i < polyline_.size(); ++i)
    cumulative_[i] = cumulative_[i - 1] + (polyline_[i] - polyline_[i - 1]).norm();
  total_length_ = cumulative_.back();
  target_yaw_ = target_yaw;
  yaw_ = start_yaw;
  limits_ = limits;
  s_ = 0.0;
  t_ = 0.0;
  active_ = true;
}

Vec3 Navigator::position_at(double s) const {
  if (polyline_.size() == 1 || s <= 0.0) return polyline_.front();
  if (s >= total_length_) return polyline_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t seg = static_cast<std::size_t>(it - cumulative_.begin());
  const double seg_start = cumulative_[seg - 1];
  const double seg_len = cumulative_[seg] - seg_start;
  const double alpha = seg_len > 1e-12 ? (s - seg_start) / seg_len : 0.0;
  return polyline_[seg - 1] + alpha * (polyline_[seg] - polyline_[seg - 1]);
}

Pose4 Navigator::advance(double dt) {
  t_ += dt;

  // Exact trapezoidal (or triangular) profile along the polyline arclength.
  const double v = limits_.v_max, a = limits_.a_max, length = total_length_;
  double duration_pos;
  const double d_acc = v * v / (2.0 * a);
  if (length <= 2.0 * d_acc) {
    duration_pos = 2.0 * std::sqrt(length / a);
  } else {
    duration_pos = 2.0 * (v / a) + (length - 2.0 * d_acc) / v;
  }
  double s;
  if (t_ >= duration_pos) {
    s = length;
  } else if (length <= 2.0 * d_acc) {
    const double t_peak = std::sqrt(length / a);
    s = t_ <= t_peak ? 0.5 * a * t_ * t_
                     : length - 0.5 * a * (2.0 * t_peak - t_) * (2.0 * t_peak - t_);
  } else {
    const double t_acc = v / a;
    const double t_cruise = (length - 2.0 * d_acc) / v;
    if (t_ <= t_acc)
      s = 0.5 * a * t_ * t_;
    else if (t_ <= t_acc + t_cruise)
      s = d_acc + v * (t_ - t_acc);
    else {
      const double td = duration_pos - t_;
      s = length - 0.5 * a * td * td;
    }
  }
  s_ = s;

  const double dyaw = wrap_angle(target_yaw_ - yaw_);
  const double step = std::clamp(dyaw, -limits_.yaw_rate_max * dt, limits_.yaw_rate_max * dt);
  yaw_ = wrap_angle(yaw_ + step);

  if (t_ >= duration_pos && std::abs(wrap_angle(target_yaw_ - yaw_)) < 1e-9) {
    yaw_ = target_yaw_;
    active_ = false;
  }
  return Pose4{position_at(s_), yaw_};
}

std::optional<std::vector<Pose4>> navigate(const MotionLimits& limits, const Pose4& from,
                                           const Pose4& target, const PlanGrid& grid, double dt) {
  auto path = grid.shortest_path(from.position, target.position);
  if (!path) return std::nullopt;
  Navigator nav;
  nav.begin(std::move(*path), target.yaw, from.yaw, limits);
  std::vector<Pose4> poses;
  const std::size_t cap = 10'000'000;
  while (nav.active() && poses.size() < cap) poses.push_back(nav.advance(dt));
  return poses;
}

namespace {

// Closed-loop simulation state; one instance per run.
class Simulation {
 public:
  Simulation(const Scenario& scenario, const DriftModel& drift, const SimConfig& config)
      : scenario_(scenario),
        drift_(drift),
        config_(config),
        map_(VoxelMap::from_bounds(scenario.bounds, map_config())),
        partition_(scenario.bounds, config.block_edge),
        pruner_(scenario.bounds, pruner_config()),
        reintegrator_(ReintegratorConfig{config.reintegration_budget, 1e-6, 1e-6}),
        detector_(config.closure),
        drift_rng_(Rng::stream(config.seed, "drift")),
        believed_(scenario.start),
        true_pose_(scenario.start) {
    dt_ = 1.0 / config_.odom_hz;
    frame_every_ = std::max(1, static_cast<int>(std::lround(config_.odom_hz / config_.frame_hz)));
    explorer_config_.epsilon = config_.epsilon;
    explorer_config_.candidate_range = config_.candidate_range;
    explorer_config_.cluster_cap = config_.cluster_cap;
    explorer_config_.cluster_radius = config_.cluster_radius;
    explorer_config_.detach_timeout = config_.detach_timeout;
    explorer_config_.cooldown = config_.cooldown;
    explorer_config_.min_gap = config_.closure.min_gap;
    explorer_config_.v_max = scenario.limits.v_max;
    explorer_config_.yaw_rate_max = scenario.limits.yaw_rate_max;
  }

  RunResult run();

 private:
  enum class State { Bootstrap, Plan, Navigate, Dwell };

  VoxelMapConfig map_config() const {
    VoxelMapConfig c;
    c.resolution = config_.map_resolution;
    c.truncation_scale = config_.truncation_scale;
    c.known_threshold = config_.tau_w;
    c.weight_policy = config_.weight_policy;
    return c;
  }

  PrunerConfig pruner_config() const {
    PrunerConfig c;
    c.scp_resolution = config_.effective_scp_resolution();
    c.block_edge = config_.block_edge;
    c.n_ob = config_.n_ob;
    c.tau_gain = config_.effective_tau_gain(c.scp_resolution);
    c.fov = SensorFov{scenario_.sensor.fov_h_deg, scenario_.sensor.fov_v_deg,
                      scenario_.sensor.max_range};
    return c;
  }

  void step_cycle();
  void sense_and_map();
  void handle_closure(int matched);
  void apply_pruning_churn();
  void plan();
  double capture_rmse();

  // inputs
  const Scenario& scenario_;
  DriftModel drift_;
  SimConfig config_;

  // mapping stack
  VoxelMap map_;
  FrameStore frames_;
  BlockPartition partition_;
  FramePruner pruner_;
  Reintegrator reintegrator_;
  ClosureDetector detector_;
  CooldownList cooldowns_;
  ExplorerConfig explorer_config_;

  // randomness and motion state
  Rng drift_rng_;
  Pose4 believed_;
  Pose4 true_pose_;
  PoseDelta offset_;  // believed = true + offset
  Navigator navigator_;

  double dt_ = 0.005;
  int frame_every_ = 20;
  std::int64_t cycle_ = 0;
  double t_ = 0.0;

  State state_ = State::Bootstrap;
  double bootstrap_remaining_ = 2.0 * kPi;
  bool rescan_used_ = false;  // one rotate-rescan when no frontier is reachable
  int emergency_stops_ = 0;

  // leg bookkeeping
  bool leg_is_alc_ = false;
  Vec3 dwell_site_{0.0, 0.0, 0.0};
  double dwell_start_ = 0.0;
  bool dwell_closed_ = false;

  // rectification bookkeeping
  int last_reset_viewpoint_ = -1;
  std::vector<std::int64_t> viewpoint_cycle_;
  std::vector<int> pending_recompute_;
  bool drain_waiting_ = false;

  // results
  bool complete_ = false;
  double exploration_time_ = 0.0;
  double flight_distance_ = 0.0;
  std::vector<ClosureRecord> closures_;
  std::vector<ReintegrationRecord> reintegrations_;
  std::vector<PlanRecord> plans_;
  std::vector<TrajectorySample> trajectory_;
  double rmse_before_last_closure_ = -1.0;
  std::optional<KdTree3> gt_tree_;
};

double Simulation::capture_rmse() {
  if (!gt_tree_) gt_tree_ = KdTree3(scenario_.ground_truth_cloud(config_.gt_spacing));
  const std::vector<Vec3> samples = map_.sample_iso_surface(map_.resolution());
  if (samples.empty()) return -1.0;
  double sum = 0.0;
  for (const Vec3& p : samples) sum += gt_tree_->nearest(p)->second;
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

void Simulation::sense_and_map() {
  Frame frame = render_depth(true_pose_, scenario_, scenario_.sensor);
  frame.pose = believed_;
  const int id = frames_.add(std::move(frame));
  viewpoint_cycle_.push_back(cycle_);
  map_.integrate_frame(frames_.at(id));
  if (config_.pruning) pruner_.add_frame(frames_.at(id));

  const std::optional<int> matched = detector_.check_and_add(true_pose_);
  if (matched) handle_closure(*matched);

  if (reintegrator_.pending()) {
    const int robot_block = partition_.block_of(believed_.position);
    const auto executed = reintegrator_.tick(map_, frames_, robot_block, partition_,
                                             config_.reintegration_budget);
    for (const auto& task : executed)
      reintegrations_.push_back({cycle_, task.frame_id, task.was_priority});
  }
  if (!reintegrator_.pending() && drain_waiting_) {
    drain_waiting_ = false;
    apply_pruning_churn();
  }
}

void Simulation::handle_closure(int matched) {
  const int j = frames_.size() - 1;  // viewpoint index == frame id
  const int start = std::max(matched, last_reset_viewpoint_);
  const int span = j - start;
  if (span <= 0) return;

  if (config_.capture_closure_rmse) {
    const double r = capture_rmse();
    if (r >= 0.0) rmse_before_last_closure_ = r;
  }

  // Redistribute the measured drift linearly over the loop segment.
  const PoseDelta measured = offset_;
  RectificationEvent event;
  event.trigger_viewpoint = j;
  event.timestamp = t_;
  for (int k = start + 1; k <= j; ++k) {
    const double lambda = static_cast<double>(k - start) / span;
    const Frame& f = frames_.at(k);
    Pose4 corrected;
    corrected.position = f.pose.position - lambda * measured.dpos;
    corrected.yaw = wrap_angle(f.pose.yaw - lambda * measured.dyaw);
    const double dpos = lambda * measured.dpos.norm();
    const double dyaw = std::abs(lambda * measured.dyaw);
    if (dpos > 1e-6 || dyaw > 1e-6) event.corrected[k] = corrected;
  }

  // Localization itself is rectified for every mapper; only the
  // re-integration mapper also repairs the map.
  const bool reint = config_.mapper == MapperMode::Reintegration;
  const auto keyframe_gate = reint ? std::function<bool(int)>([](int) { return true; })
                                   : std::function<bool(int)>([](int) { return false; });
  reintegrator_.on_rectification(event, frames_, keyframe_gate);

  for (const auto& entry : event.corrected) pending_recompute_.push_back(entry.first);
  drain_waiting_ = true;

  // Retroactive trajectory correction over the same segment.
  const std::int64_t c0 = viewpoint_cycle_[static_cast<std::size_t>(start)];
  const std::int64_t c1 = viewpoint_cycle_[static_cast<std::size_t>(j)];
  if (c1 > c0) {
    for (std::int64_t c = c0 + 1; c <= c1 && c < static_cast<std::int64_t>(trajectory_.size());
         ++c) {
      const double lambda = static_cast<double>(c - c0) / static_cast<double>(c1 - c0);
      TrajectorySample& s = trajectory_[static_cast<std::size_t>(c)];
      s.rectified.position = s.drifted.position - lambda * measured.dpos;
      s.rectified.yaw = wrap_angle(s.drifted.yaw - lambda * measured.dyaw);
    }
  }

  // The current believed pose snaps onto truth; drift restarts from zero.
  believed_.position -= measured.dpos;
  believed_.yaw = wrap_angle(believed_.yaw - measured.dyaw);
  offset_ = PoseDelta{};
  last_reset_viewpoint_ = j;

  closures_.push_back({t_, j, matched, static_cast<int>(event.corrected.size())});
  if (state_ == State::Dwell) dwell_closed_ = true;

  // The believed frame jumped; any leg in progress is stale.
  navigator_.abort();
  if (state_ == State::Navigate) state_ = State::Plan;
}

void Simulation::apply_pruning_churn() {
  if (!config_.pruning) {
    pending_recompute_.clear();
    return;
  }
  for (int id : pending_recompute_) pruner_.on_pose_rectified(frames_.at(id));
  pending_recompute_.clear();
  std::vector<int> added, removed;
  pruner_.solve_dirty(&added, &removed);
  for (int id : removed) {
    Frame& f = frames_.at(id);
    if (f.integrated()) map_.deintegrate_frame(f);
  }
  for (int id : added) {
    Frame& f = frames_.at(id);
    if (!f.integrated()) map_.integrate_frame(f);
  }
}

void Simulation::plan() {
  apply_pruning_churn();

  const std::vector<FrontierCluster> frontiers_all =
      extract_frontiers(map_, FrontierConfig{config_.min_frontier_cluster});
  if (frontiers_all.empty()) {
    complete_ = true;
    exploration_time_ = t_;
    return;
  }

  const PlanGrid grid(map_, config_.plan_coarsen, config_.clearance);

  // Keep frontiers whose viewpoints are reachable from here.
  std::vector<Vec3> targets;
  for (const auto& f : frontiers_all) targets.push_back(f.viewpoint.position);
  const std::vector<double> lengths = grid.path_lengths(believed_.position, targets);
  std::vector<FrontierCluster> frontiers;
  for (std::size_t i = 0; i < frontiers_all.size(); ++i)
    if (lengths[i] < kUnreachableCost) frontiers.push_back(frontiers_all[i]);

  if (frontiers.empty()) {
    if (!rescan_used_) {
      rescan_used_ = true;
      bootstrap_remaining_ = 2.0 * kPi;
      state_ = State::Bootstrap;
      return;
    }
    // Only unreachable shreds remain; reachable space is exhausted.
    complete_ = true;
    exploration_time_ = t_;
    return;
  }
  rescan_used_ = false;

  std::optional<LoopCandidate> candidate;
  if (config_.alc) {
    std::vector<Pose4> path;
    path.reserve(static_cast<std::size_t>(frames_.size()));
    for (int i = 0; i < frames_.size(); ++i) path.push_back(frames_.at(i).pose);
    const ViewpointHistory history =
        cluster_history(path, config_.cluster_cap, config_.cluster_radius);
    candidate = select_loop_candidate(believed_, history, grid, explorer_config_, cooldowns_, t_,
                                      frames_.size() - 1);
  }

  PlanRecord record = plan_global_tour(believed_, frontiers, candidate, grid, explorer_config_);
  plans_.push_back(record);
  if (!record.feasible) {
    complete_ = true;
    exploration_time_ = t_;
    return;
  }

  // Receding horizon: execute the first entity of the tour, then replan.
  Pose4 target;
  if (record.chose_loop) {
    target = candidate->center;
    leg_is_alc_ = true;
    dwell_site_ = candidate->center.position;
  } else {
    const int first = record.tour.order.at(1);  // matrix index 1..n
    target = frontiers[static_cast<std::size_t>(first - 1)].viewpoint;
    leg_is_alc_ = false;
  }

  auto path = grid.shortest_path(believed_.position, target.position);
  if (!path) {
    // Snap mismatch; very rare. Rescan once, else give up on this cycle.
    if (!rescan_used_) {
      rescan_used_ = true;
      bootstrap_remaining_ = 2.0 * kPi;
      state_ = State::Bootstrap;
      return;
    }
    complete_ = true;
    exploration_time_ = t_;
    return;
  }
  navigator_.begin(std::move(*path), target.yaw, believed_.yaw, scenario_.limits);
  state_ = State::Navigate;
}

void Simulation::step_cycle() {
  const Pose4 believed_prev = believed_;

  // Commanded believed-frame motion for this cycle.
  Pose4 commanded = believed_prev;
  switch (state_) {
    case State::Bootstrap: {
      const double step = std::min(bootstrap_remaining_, scenario_.limits.yaw_rate_max * dt_);
      commanded.yaw = wrap_angle(commanded.yaw + step);
      bootstrap_remaining_ -= step;
      break;
    }
    case State::Navigate:
      if (navigator_.active()) commanded = navigator_.advance(dt_);
      break;
    case State::Dwell:
    case State::Plan:
      break;  // hold position
  }

  // Odometry noise accrues every cycle regardless of motion.
  const PoseDelta true_delta{commanded.position - believed_prev.position,
                             wrap_angle(commanded.yaw - believed_prev.yaw)};
  const PoseDelta drifted_delta = step_drift(drift_, drift_rng_, dt_, true_delta);
  offset_.dpos += drifted_delta.dpos - true_delta.dpos;
  offset_.dyaw = wrap_angle(offset_.dyaw + drifted_delta.dyaw - true_delta.dyaw);

  Pose4 tentative_true;
  tentative_true.position = commanded.position - offset_.dpos;
  tentative_true.yaw = wrap_angle(commanded.yaw - offset_.dyaw);

  if (scenario_.collides(tentative_true.position, config_.robot_radius)) {
    // Emergency stop: the vehicle halts physically; odometry keeps drifting.
    tentative_true.position = true_pose_.position;
    commanded.position = true_pose_.position + offset_.dpos;
    navigator_.abort();
    ++emergency_stops_;
    if (state_ == State::Navigate) {
      if (emergency_stops_ >= 3) {
        emergency_stops_ = 0;
        bootstrap_remaining_ = 2.0 * kPi;
        state_ = State::Bootstrap;
      } else {
        state_ = State::Plan;
      }
    }
  }

  flight_distance_ += (tentative_true.position - true_pose_.position).norm();
  true_pose_ = tentative_true;
  believed_ = commanded;

  trajectory_.push_back({t_, true_pose_, believed_, believed_});

  if (cycle_ % frame_every_ == 0) sense_and_map();

  // State transitions after sensing (closure handling may have moved us).
  switch (state_) {
    case State::Bootstrap:
      if (bootstrap_remaining_ <= 1e-12) state_ = State::Plan;
      break;
    case State::Navigate:
      if (!navigator_.active()) {
        if (leg_is_alc_) {
          state_ = State::Dwell;
          dwell_start_ = t_;
          dwell_closed_ = false;
        } else {
          state_ = State::Plan;
        }
      } else if (cycle_ % frame_every_ == 0) {
        // Cheap validity check of the remaining path against the live map.
        const double res = map_.resolution();
        const auto& line = navigator_.polyline();
        bool ok = true;
        for (std::size_t i = 0; i + 1 < line.size() && ok; ++i) {
          const Vec3 a = line[i], b = line[i + 1];
          const double len = (b - a).norm();
          const int steps = std::max(1, static_cast<int>(len / res));
          for (int s = 0; s <= steps; ++s) {
            const Vec3 p = a + (b - a) * (static_cast<double>(s) / steps);
            const Eigen::Vector3i cell = map_.cell_of(p);
            if (!map_.in_bounds(cell)) continue;
            const TsdfVoxel& v = map_.voxel(cell);
            if (v.weight > map_.known_threshold() && v.sdf <= 0.0) {
              ok = false;
              break;
            }
          }
        }
        if (!ok) {
          navigator_.abort();
          state_ = State::Plan;
        }
      }
      break;
    case State::Dwell: {
      if (dwell_closed_) {
        state_ = State::Plan;
      } else if (detach_check(t_ - dwell_start_, config_.detach_timeout, dwell_closed_)) {
        cooldowns_.add(dwell_site_, t_ + config_.cooldown);
        state_ = State::Plan;
      }
      break;
    }
    case State::Plan:
      break;
  }

  ++cycle_;
  t_ += dt_;
}

RunResult Simulation::run() {
  const auto wall_start = std::chrono::steady_clock::now();

  while (t_ < config_.sim_time_budget) {
    if (state_ == State::Plan && !reintegrator_.pending()) {
      plan();
      if (complete_) break;
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
      if (wall > config_.wall_clock_budget) break;
    }
    step_cycle();
  }

  // Final drain and churn so the result reflects the settled map.
  while (reintegrator_.pending()) {
    const int robot_block = partition_.block_of(believed_.position);
    const auto executed =
        reintegrator_.tick(map_, frames_, robot_block, partition_, config_.reintegration_budget);
    for (const auto& task : executed)
      reintegrations_.push_back({cycle_, task.frame_id, task.was_priority});
  }
  apply_pruning_churn();

  RunResult result(std::move(map_));
  result.complete = complete_;
  result.exploration_time = complete_ ? exploration_time_ : t_;
  result.flight_distance = flight_distance_;
  result.total_frames = frames_.size();
  result.keyframe_count =
      config_.pruning ? static_cast<int>(pruner_.all_keyframes().size()) : frames_.size();
  result.closures = std::move(closures_);
  result.reintegrations = std::move(reintegrations_);
  result.plans = std::move(plans_);
  result.pruning_log = pruner_.selection_log();
  result.trajectory = std::move(trajectory_);
  result.rmse_before_last_closure = rmse_before_last_closure_;
  if (config_.capture_closure_rmse && !result.closures.empty()) {
    gt_tree_.reset();
    result.rmse_after_drain = rmse(result.map, scenario_.ground_truth_cloud(config_.gt_spacing));
  }
  result.scenario_name = scenario_.name;
  result.drift_level = drift_.level;
  return result;
}

}  // namespace

RunResult run_exploration(const Scenario& scenario, const DriftModel& drift,
                          const SimConfig& config) {
  scenario.validate();
  Simulation sim(scenario, drift, config);
  return sim.run();
}

}  // namespace exsim
