#include "exsim/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

namespace exsim {

namespace {

bool known_free(const VoxelMap& map, std::size_t lin) {
  const TsdfVoxel& v = map.voxel(lin);
  return v.weight > map.known_threshold() && v.sdf > 0.0;
}

bool not_known(const VoxelMap& map, const Eigen::Vector3i& idx) {
  return map.voxel(idx).weight <= map.known_threshold();
}

}  // namespace

std::vector<FrontierCluster> extract_frontiers(const VoxelMap& map, const FrontierConfig& config) {
  const Eigen::Vector3i dims = map.dims();
  const std::size_t n = map.cell_count();
  std::vector<bool> frontier(n, false);

  const Eigen::Vector3i face_offsets[6] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                           {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};

  for (int z = 0; z < dims.z(); ++z)
    for (int y = 0; y < dims.y(); ++y)
      for (int x = 0; x < dims.x(); ++x) {
        const Eigen::Vector3i idx(x, y, z);
        const std::size_t lin = map.linear_index(idx);
        if (!known_free(map, lin)) continue;
        for (const auto& off : face_offsets) {
          const Eigen::Vector3i nb = idx + off;
          if (!map.in_bounds(nb)) continue;  // outside the declared volume is not explorable
          if (not_known(map, nb)) {
            frontier[lin] = true;
            break;
          }
        }
      }

  // Connected components over the frontier cells, 26-connectivity, in scan
  // order for deterministic ids.
  std::vector<FrontierCluster> clusters;
  std::vector<bool> visited(n, false);
  for (int z = 0; z < dims.z(); ++z)
    for (int y = 0; y < dims.y(); ++y)
      for (int x = 0; x < dims.x(); ++x) {
        const Eigen::Vector3i seed(x, y, z);
        const std::size_t seed_lin = map.linear_index(seed);
        if (!frontier[seed_lin] || visited[seed_lin]) continue;
        FrontierCluster cluster;
        std::queue<Eigen::Vector3i> queue;
        queue.push(seed);
        visited[seed_lin] = true;
        while (!queue.empty()) {
          const Eigen::Vector3i cur = queue.front();
          queue.pop();
          cluster.cells.push_back(cur);
          for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                const Eigen::Vector3i nb = cur + Eigen::Vector3i(dx, dy, dz);
                if (!map.in_bounds(nb)) continue;
                const std::size_t nlin = map.linear_index(nb);
                if (!frontier[nlin] || visited[nlin]) continue;
                visited[nlin] = true;
                queue.push(nb);
              }
        }
        if (static_cast<int>(cluster.cells.size()) < config.min_cluster_size) continue;

        Vec3 centroid = Vec3::Zero();
        for (const auto& c : cluster.cells) centroid += map.cell_center(c);
        centroid /= static_cast<double>(cluster.cells.size());
        cluster.centroid = centroid;

        // Representative viewpoint: member cell nearest the centroid.
        double best_d2 = std::numeric_limits<double>::infinity();
        Eigen::Vector3i best_cell = cluster.cells.front();
        for (const auto& c : cluster.cells) {
          const double d2 = (map.cell_center(c) - centroid).squaredNorm();
          if (d2 < best_d2) {
            best_d2 = d2;
            best_cell = c;
          }
        }
        cluster.viewpoint.position = map.cell_center(best_cell);

        // Yaw faces the centroid of the adjacent unknown mass.
        Vec3 unknown_sum = Vec3::Zero();
        int unknown_count = 0;
        std::unordered_set<std::size_t> seen;
        for (const auto& c : cluster.cells)
          for (const auto& off : face_offsets) {
            const Eigen::Vector3i nb = c + off;
            if (!map.in_bounds(nb)) continue;
            const std::size_t nlin = map.linear_index(nb);
            if (!not_known(map, nb)) continue;
            if (!seen.insert(nlin).second) continue;
            unknown_sum += map.cell_center(nb);
            ++unknown_count;
          }
        if (unknown_count > 0) {
          const Vec3 toward = unknown_sum / unknown_count - cluster.viewpoint.position;
          if (toward.head<2>().norm() > 1e-9)
            cluster.viewpoint.yaw = std::atan2(toward.y(), toward.x());
        }

        cluster.id = static_cast<int>(clusters.size());
        clusters.push_back(std::move(cluster));
      }
  return clusters;
}

ViewpointHistory cluster_history(const std::vector<Pose4>& path, int cap, double radius) {
  ViewpointHistory history;
  std::vector<Vec3> positions;
  positions.reserve(path.size());

  ViewpointCluster current;
  auto flush = [&](int next_index) {
    if (current.members.empty()) return;
    // Center viewpoint: member nearest the member-position centroid.
    Vec3 centroid = Vec3::Zero();
    for (const auto& m : current.members) centroid += m.position;
    centroid /= static_cast<double>(current.members.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < current.members.size(); ++i) {
      const double d2 = (current.members[i].position - centroid).squaredNorm();
      if (d2 < best) {
        best = d2;
        current.center_member = static_cast<int>(i);
      }
    }
    current.id = static_cast<int>(history.clusters.size());
    for (int idx : current.member_indices) {
      (void)idx;
      history.member_cluster.push_back(current.id);
    }
    history.clusters.push_back(std::move(current));
    current = ViewpointCluster{};
    current.first_index = next_index;
  };

  for (int i = 0; i < static_cast<int>(path.size()); ++i) {
    const Pose4& vp = path[static_cast<std::size_t>(i)];
    const bool cap_hit = static_cast<int>(current.members.size()) >= cap;
    const bool radius_hit =
        !current.members.empty() &&
        (vp.position - current.members.front().position).norm() > radius;
    if (cap_hit || radius_hit) flush(i);
    if (current.members.empty()) current.first_index = i;
    current.members.push_back(vp);
    current.member_indices.push_back(i);
    current.last_index = i;
    positions.push_back(vp.position);
  }
  flush(static_cast<int>(path.size()));

  history.tree = KdTree3(std::move(positions));
  return history;
}

std::optional<LoopCandidate> select_loop_candidate(const Pose4& state,
                                                   const ViewpointHistory& history,
                                                   const PlanGrid& grid,
                                                   const ExplorerConfig& config,
                                                   const CooldownList& cooldowns, double now,
                                                   int current_viewpoint_index) {
  if (history.tree.empty()) return std::nullopt;
  const std::vector<int> in_range = history.tree.radius(state.position, config.candidate_range);
  std::vector<int> cluster_ids;
  for (int member : in_range) {
    const int cid = history.member_cluster[static_cast<std::size_t>(member)];
    if (std::find(cluster_ids.begin(), cluster_ids.end(), cid) == cluster_ids.end())
      cluster_ids.push_back(cid);
  }
  std::sort(cluster_ids.begin(), cluster_ids.end());

  std::optional<LoopCandidate> best;
  for (int cid : cluster_ids) {
    const ViewpointCluster& cluster = history.clusters[static_cast<std::size_t>(cid)];
    // Too recent to be a revisit: a closure there could not fire anyway.
    if (current_viewpoint_index >= 0 &&
        cluster.last_index > current_viewpoint_index - config.min_gap)
      continue;
    if (cooldowns.blocked(cluster.center().position, now, config.cluster_radius)) continue;
    const double cost =
        move_cost(state, cluster.center(), config.v_max, config.yaw_rate_max, grid);
    if (cost >= kUnreachableCost) continue;
    if (!best || cost < best->cost) best = LoopCandidate{cid, cluster.center(), cost};
  }
  return best;
}

TourMatrices build_matrices(const Pose4& state, const std::vector<FrontierCluster>& frontiers,
                            const std::optional<LoopCandidate>& candidate, const PlanGrid& grid,
                            const ExplorerConfig& config) {
  const int n = static_cast<int>(frontiers.size());
  TourMatrices out;
  out.frontier.costs = Eigen::MatrixXd::Zero(n + 1, n + 1);
  out.frontier.labels.resize(static_cast<std::size_t>(n) + 1);
  out.frontier.labels[0] = -1;
  for (int i = 0; i < n; ++i)
    out.frontier.labels[static_cast<std::size_t>(i) + 1] = frontiers[static_cast<std::size_t>(i)].id;

  std::vector<Vec3> targets;
  targets.reserve(static_cast<std::size_t>(n));
  for (const auto& f : frontiers) targets.push_back(f.viewpoint.position);

  auto fill_row = [&](Eigen::MatrixXd& m, int row, const Pose4& from) {
    const std::vector<double> lengths = grid.path_lengths(from.position, targets);
    for (int j = 0; j < n; ++j) {
      if (row == j + 1) continue;
      const Pose4& to = frontiers[static_cast<std::size_t>(j)].viewpoint;
      double length = lengths[static_cast<std::size_t>(j)];
      if (length >= kUnreachableCost) {
        m(row, j + 1) = kUnreachableCost;
        continue;
      }
      length = std::max(length, (to.position - from.position).norm());
      m(row, j + 1) = std::max(length / config.v_max,
                               yaw_distance(from.yaw, to.yaw) / config.yaw_rate_max);
    }
  };

  fill_row(out.frontier.costs, 0, state);
  for (int i = 0; i < n; ++i)
    fill_row(out.frontier.costs, i + 1, frontiers[static_cast<std::size_t>(i)].viewpoint);
  // Column 0 stays zero: open tours do not return to the start.

  if (candidate) {
    out.loop = out.frontier;
    fill_row(out.loop->costs, 0, candidate->center);
  }
  return out;
}

PlanRecord plan_global_tour(const Pose4& state, const std::vector<FrontierCluster>& frontiers,
                            const std::optional<LoopCandidate>& candidate, const PlanGrid& grid,
                            const ExplorerConfig& config) {
  PlanRecord record;
  record.frontier_count = static_cast<int>(frontiers.size());
  record.epsilon = config.epsilon;
  if (frontiers.empty()) {
    record.feasible = false;
    return record;
  }

  const TourMatrices matrices = build_matrices(state, frontiers, candidate, grid, config);
  Tour frontier_tour = solve_atsp(matrices.frontier);
  const double cost_frontier = compute_total_cost(frontier_tour, matrices.frontier);
  record.cost_frontier = cost_frontier;
  record.solver = frontier_tour.solver;

  bool frontier_feasible = cost_frontier < kUnreachableCost;

  if (candidate && matrices.loop) {
    Tour loop_tour = solve_atsp(*matrices.loop);
    // Total loop cost includes the approach from the current state to the
    // candidate's center viewpoint.
    const double cost_loop = compute_total_cost(loop_tour, *matrices.loop) + candidate->cost;
    record.candidate_cluster = candidate->cluster_id;
    record.cost_loop = cost_loop;
    if (cost_loop < kUnreachableCost && frontier_feasible &&
        cost_loop <= (1.0 + config.epsilon) * cost_frontier) {
      record.chose_loop = true;
      record.tour = std::move(loop_tour);
      record.feasible = true;
      return record;
    }
  }

  record.tour = std::move(frontier_tour);
  record.feasible = frontier_feasible;
  return record;
}

bool detach_check(double elapsed, double timeout, bool closure_detected) {
  return !closure_detected && elapsed > timeout;
}

}  // namespace exsim
