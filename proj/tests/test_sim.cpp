#include <doctest.h>

#include <cmath>

#include "exsim/sim.hpp"

using namespace exsim;

namespace {

SimConfig fast_config() {
  SimConfig cfg;
  cfg.sim_time_budget = 240.0;
  return cfg;
}

}  // namespace

TEST_CASE("drift presets match the parameter table") {
  const DriftModel s1 = DriftModel::preset("s1");
  CHECK(s1.mu_xyz == 0.0);
  CHECK(s1.var_xyz == 0.0);
  CHECK(s1.mu_yaw == 0.0);
  CHECK(s1.var_yaw == 0.0);
  const DriftModel s2 = DriftModel::preset("s2");
  CHECK(s2.var_xyz == doctest::Approx(2e-2));
  CHECK(s2.var_yaw == doctest::Approx(2e-2));
  CHECK(s2.mu_yaw == 0.0);
  const DriftModel s3 = DriftModel::preset("s3");
  CHECK(s3.var_xyz == doctest::Approx(5e-2));
  CHECK(s3.mu_yaw == doctest::Approx(1e-3));
  CHECK(s3.var_yaw == doctest::Approx(5e-2));
  const DriftModel s4 = DriftModel::preset("s4");
  CHECK(s4.var_xyz == doctest::Approx(8e-2));
  CHECK(s4.mu_yaw == doctest::Approx(1.5e-3));
  CHECK(s4.var_yaw == doctest::Approx(8e-2));
  CHECK_THROWS_AS(DriftModel::preset("s5"), std::invalid_argument);
}

TEST_CASE("s1 drift returns the true delta exactly") {
  const DriftModel s1 = DriftModel::preset("s1");
  Rng rng = Rng::stream(12, "drift");
  const PoseDelta truth{Vec3(0.01, -0.02, 0.003), 0.004};
  for (int i = 0; i < 100; ++i) {
    const PoseDelta out = step_drift(s1, rng, 1.0 / 200.0, truth);
    CHECK(out.dpos == truth.dpos);
    CHECK(out.dyaw == truth.dyaw);
  }
}

TEST_CASE("s3 yaw bias accumulates to the expected mean") {
  // mu_yaw = 1e-3 rad/s for 60 s -> 0.06 rad expected drift.
  const DriftModel s3 = DriftModel::preset("s3");
  const double dt = 1.0 / 200.0;
  const int cycles = 60 * 200;
  double mean = 0.0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(static_cast<std::uint64_t>(trial), "drift");
    double yaw = 0.0;
    for (int c = 0; c < cycles; ++c) yaw += step_drift(s3, rng, dt, PoseDelta{}).dyaw;
    mean += yaw;
  }
  mean /= trials;
  // Noise std of the trial mean is sqrt(var*T/200/trials) ~ 0.0087.
  CHECK(mean == doctest::Approx(0.06).epsilon(0.5));
}

TEST_CASE("s4 position drift variance grows linearly in cycle count") {
  // Var after T seconds = var_xyz * T / 200 per axis; Monte Carlo check.
  const DriftModel s4 = DriftModel::preset("s4");
  const double dt = 1.0 / 200.0;
  const double T = 10.0;
  const int cycles = static_cast<int>(T * 200);
  const int trials = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(static_cast<std::uint64_t>(trial) + 999, "drift");
    double x = 0.0;
    for (int c = 0; c < cycles; ++c) x += step_drift(s4, rng, dt, PoseDelta{}).dpos.x();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / trials;
  const double var = sum2 / trials - mean * mean;
  const double expected = s4.var_xyz * T / 200.0;
  CHECK(var == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("seeded drift sequences are reproducible") {
  const DriftModel s3 = DriftModel::preset("s3");
  Rng a = Rng::stream(77, "drift");
  Rng b = Rng::stream(77, "drift");
  for (int i = 0; i < 1000; ++i) {
    const PoseDelta da = step_drift(s3, a, 1.0 / 200.0, PoseDelta{});
    const PoseDelta db = step_drift(s3, b, 1.0 / 200.0, PoseDelta{});
    CHECK(da.dpos == db.dpos);
    CHECK(da.dyaw == db.dyaw);
  }
}

TEST_CASE("render_depth against a flat wall") {
  Scenario s;
  s.bounds = {{0, 0, 0}, {10, 10, 4}};
  s.obstacles = {{{4.0, 0.0, 0.0}, {5.0, 10.0, 4.0}}};
  s.start = {{2.0, 5.0, 2.0}, 0.0};
  s.validate();
  // Camera 2 m from the wall plane x = 4, looking straight at it.
  const Pose4 pose{Vec3(2.0, 5.0, 2.0), 0.0};
  const Frame frame = render_depth(pose, s, s.sensor);
  REQUIRE(!frame.points.empty());

  const double half_h = deg_to_rad(s.sensor.fov_h_deg) / 2.0;
  const double half_v = deg_to_rad(s.sensor.fov_v_deg) / 2.0;
  const double max_t = 2.0 / (std::cos(half_h) * std::cos(half_v));
  for (const Vec3& p : frame.points) {
    const double range = p.norm();
    CHECK(range >= 2.0 - 1e-9);
    CHECK(range <= max_t + 1e-6);
    CHECK(p.z() > 0.0);
    CHECK(p.z() <= s.sensor.max_range);
  }
}

TEST_CASE("rays beyond max range produce no point") {
  Scenario s;
  s.bounds = {{0, 0, 0}, {30, 16, 3}};
  s.start = {{2.0, 8.0, 1.5}, 0.0};
  s.validate();
  // Looking down the long axis: the far wall is ~28 m away.
  const Frame frame = render_depth(s.start, s, s.sensor);
  // Only rays hitting side walls/floor/ceiling within 4.5 m return points.
  for (const Vec3& p : frame.points) CHECK(p.norm() <= s.sensor.max_range + 1e-9);
  CHECK(frame.points.size() < static_cast<std::size_t>(s.sensor.rays_h * s.sensor.rays_v));
}

TEST_CASE("rendered points lie on scenario surfaces") {
  const Scenario s = Scenario::preset("maze");
  const Pose4 pose{Vec3(2.0, 2.0, 1.5), 0.7};
  const Frame frame = render_depth(pose, s, s.sensor);
  REQUIRE(!frame.points.empty());
  for (const Vec3& p_cam : frame.points) {
    const Vec3 w = pose.camera_to_world(p_cam);
    double dist = std::numeric_limits<double>::infinity();
    // Distance to the nearest obstacle surface or boundary wall.
    for (const auto& box : s.obstacles) dist = std::min(dist, std::abs(box.distance(w)));
    for (int a = 0; a < 3; ++a) {
      dist = std::min(dist, std::abs(w[a] - s.bounds.min[a]));
      dist = std::min(dist, std::abs(w[a] - s.bounds.max[a]));
    }
    CHECK(dist < 1e-6);
  }
}

TEST_CASE("closure fires on revisits and respects gap and yaw rules") {
  ClosureThresholds th;
  th.distance = 0.5;
  th.yaw = 0.3;
  th.min_gap = 80;
  ClosureDetector detector(th);

  // 100 viewpoints marching away, then a revisit of viewpoint 12.
  for (int i = 0; i < 100; ++i)
    CHECK_FALSE(detector.check_and_add({Vec3(0.1 * i, 0.0, 1.0), 0.0}).has_value());
  const auto hit = detector.check_and_add({Vec3(1.2 + 0.1, 0.0, 1.0), 0.1});
  REQUIRE(hit.has_value());
  CHECK(*hit == 13);  // nearest eligible viewpoint position (1.3)
}

TEST_CASE("closure rejects opposing yaw (co-visibility proxy)") {
  ClosureThresholds th;
  ClosureDetector detector(th);
  for (int i = 0; i < 60; ++i) detector.check_and_add({Vec3(0.1 * i, 0.0, 1.0), 0.0});
  CHECK_FALSE(detector.check_and_add({Vec3(0.0, 0.0, 1.0), kPi}).has_value());
}

TEST_CASE("closure needs the minimum viewpoint gap") {
  ClosureThresholds th;
  th.min_gap = 50;
  ClosureDetector detector(th);
  for (int i = 0; i < 30; ++i)
    CHECK_FALSE(detector.check_and_add({Vec3(0.001 * i, 0.0, 1.0), 0.0}).has_value());
}

TEST_CASE("closure fires at most once per visit") {
  ClosureThresholds th;
  th.min_gap = 50;
  ClosureDetector detector(th);
  for (int i = 0; i < 60; ++i) detector.check_and_add({Vec3(0.2 * i, 0.0, 1.0), 0.0});
  const auto first = detector.check_and_add({Vec3(0.0, 0.0, 1.0), 0.0});
  REQUIRE(first.has_value());
  // Still hovering at the same spot: suppressed.
  for (int i = 0; i < 5; ++i)
    CHECK_FALSE(detector.check_and_add({Vec3(0.01, 0.0, 1.0), 0.0}).has_value());
}

TEST_CASE("find_closure is a pure function of true poses") {
  ClosureThresholds th;
  std::vector<Pose4> history;
  std::vector<Vec3> positions;
  for (int i = 0; i < 120; ++i) {
    history.push_back({Vec3(0.1 * i, 0.0, 1.0), 0.0});
    positions.push_back(history.back().position);
  }
  const KdTree3 tree(positions);
  const Pose4 q{Vec3(0.42, 0.0, 1.0), 0.05};
  const auto a = find_closure(q, 120, history, tree, th);
  const auto b = find_closure(q, 120, history, tree, th);
  REQUIRE(a.has_value());
  CHECK(*a == *b);
  CHECK(*a == 4);
}

TEST_CASE("navigator trapezoid timing on a straight leg") {
  // 6 m at v_max=2, a_max=2: 1 s accel (1 m), 2 s cruise (4 m), 1 s decel.
  VoxelMapConfig mc;
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(80, 20, 20), mc);
  for (std::size_t i = 0; i < map.cell_count(); ++i) map.voxel_mutable(i) = {0.4, 1.0};
  const PlanGrid grid(map, 1, 0.0);
  MotionLimits limits{2.0, 2.0, 0.9};
  const Pose4 from{Vec3(0.55, 1.05, 1.05), 0.0};
  const Pose4 to{Vec3(6.55, 1.05, 1.05), 0.0};
  const auto poses = navigate(limits, from, to, grid, 1.0 / 200.0);
  REQUIRE(poses.has_value());
  const double duration = static_cast<double>(poses->size()) / 200.0;
  CHECK(duration == doctest::Approx(4.0).epsilon(0.02));
  CHECK((poses->back().position - to.position).norm() < 1e-6);
}

TEST_CASE("navigator pure yaw turn duration") {
  VoxelMapConfig mc;
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(20, 20, 20), mc);
  for (std::size_t i = 0; i < map.cell_count(); ++i) map.voxel_mutable(i) = {0.4, 1.0};
  const PlanGrid grid(map, 1, 0.0);
  MotionLimits limits{2.0, 2.0, 0.9};
  const Pose4 from{Vec3(1.0, 1.0, 1.0), 0.0};
  const Pose4 to{Vec3(1.0, 1.0, 1.0), kPi - 1e-6};
  const auto poses = navigate(limits, from, to, grid, 1.0 / 200.0);
  REQUIRE(poses.has_value());
  const double duration = static_cast<double>(poses->size()) / 200.0;
  CHECK(duration == doctest::Approx(kPi / 0.9).epsilon(0.02));
}

TEST_CASE("navigator emits collision-free poses in a mapped maze") {
  // Map the maze's true occupancy directly, then navigate between two free
  // spots; every emitted pose must clear the true obstacles.
  const Scenario s = Scenario::preset("maze");
  VoxelMapConfig mc;
  VoxelMap map = VoxelMap::from_bounds(s.bounds, mc);
  for (int z = 0; z < map.dims().z(); ++z)
    for (int y = 0; y < map.dims().y(); ++y)
      for (int x = 0; x < map.dims().x(); ++x) {
        const Eigen::Vector3i idx(x, y, z);
        const Vec3 c = map.cell_center(idx);
        double sdf = 1e9;
        for (const auto& box : s.obstacles) sdf = std::min(sdf, box.distance(c));
        for (int a = 0; a < 3; ++a)
          sdf = std::min({sdf, c[a] - s.bounds.min[a], s.bounds.max[a] - c[a]});
        map.voxel_mutable(map.linear_index(idx)) = {std::min(sdf, 0.4), 1.0};
      }
  const PlanGrid grid(map, 2, 0.2);
  const Pose4 from{Vec3(2.0, 2.0, 1.5), 0.0};
  const Pose4 to{Vec3(18.0, 13.0, 1.5), 1.0};
  const auto poses = navigate(s.limits, from, to, grid, 1.0 / 200.0);
  REQUIRE(poses.has_value());
  for (const auto& pose : *poses) CHECK_FALSE(s.collides(pose.position, 0.1));
}

TEST_CASE("scenario json round-trip") {
  const Scenario s = Scenario::preset("maze");
  const std::string text = s.to_json_string();
  const Scenario back = Scenario::from_json_string(text);
  CHECK(back.name == s.name);
  CHECK(back.obstacles.size() == s.obstacles.size());
  CHECK((back.start.position - s.start.position).norm() < 1e-12);
  CHECK(back.sensor.rays_h == s.sensor.rays_h);
  CHECK(back.limits.v_max == s.limits.v_max);
}

TEST_CASE("scenario validation rejects bad configurations") {
  Scenario s = Scenario::preset("room");
  s.start.position = Vec3(3.5, 3.5, 1.0);  // inside the box obstacle
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  Scenario s2 = Scenario::preset("room");
  s2.obstacles.push_back({{7, 7, 0}, {9, 9, 2}});  // pokes outside bounds
  CHECK_THROWS_AS(s2.validate(), std::invalid_argument);
}

TEST_CASE("room exploration completes under s1 and is deterministic") {
  const Scenario room = Scenario::preset("room");
  const DriftModel s1 = DriftModel::preset("s1");
  SimConfig cfg = fast_config();
  cfg.seed = 5;

  RunResult a = run_exploration(room, s1, cfg);
  CHECK(a.complete);
  CHECK(a.total_frames > 0);
  CHECK(a.exploration_time > 0.0);
  CHECK(a.flight_distance > 0.0);
  // s1: drifted pose equals true pose exactly on every cycle.
  for (const auto& sample : a.trajectory) {
    CHECK((sample.truth.position - sample.drifted.position).norm() == 0.0);
    CHECK(sample.truth.yaw == sample.drifted.yaw);
  }

  RunResult b = run_exploration(room, s1, cfg);
  CHECK(b.complete == a.complete);
  CHECK(b.exploration_time == a.exploration_time);
  CHECK(b.flight_distance == a.flight_distance);
  CHECK(b.total_frames == a.total_frames);
  CHECK(b.closures.size() == a.closures.size());
}

TEST_CASE("emitted true poses stay clear of obstacles during a drifted run") {
  const Scenario room = Scenario::preset("room");
  const DriftModel s3 = DriftModel::preset("s3");
  SimConfig cfg = fast_config();
  cfg.seed = 11;
  cfg.sim_time_budget = 120.0;
  const RunResult result = run_exploration(room, s3, cfg);
  for (const auto& sample : result.trajectory) {
    CHECK_FALSE(room.collides(sample.truth.position, cfg.robot_radius - 1e-9));
  }
}
