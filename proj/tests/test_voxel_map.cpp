#include <doctest.h>

#include <cmath>

#include "exsim/geometry.hpp"
#include "exsim/map_io.hpp"
#include "exsim/rng.hpp"
#include "exsim/voxel_map.hpp"

using namespace exsim;

namespace {

VoxelMapConfig default_config() {
  VoxelMapConfig c;
  c.resolution = 0.1;
  c.truncation_scale = 4.0;
  c.known_threshold = 0.5;
  c.weight_policy = WeightPolicy::DepthScaled;
  return c;
}

// Synthetic frame: points on a wall plane z_cam = depth, jittered within the
// FOV, deterministic for the given rng.
Frame random_frame(Rng& rng, int n_points, double max_depth) {
  Frame f;
  f.pose.position = Vec3(rng.uniform(2.0, 4.0), rng.uniform(2.0, 4.0), rng.uniform(2.0, 4.0));
  f.pose.yaw = rng.uniform(-kPi, kPi);
  for (int i = 0; i < n_points; ++i) {
    const double az = rng.uniform(-0.6, 0.6);
    const double el = rng.uniform(-0.45, 0.45);
    const double depth = rng.uniform(0.8, max_depth);
    f.points.push_back(direction_from_angles(az, el) * depth);
  }
  return f;
}

double max_relative_voxel_difference(const VoxelMap& a, const VoxelMap& b) {
  REQUIRE(a.dims() == b.dims());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.cell_count(); ++i) {
    const TsdfVoxel& va = a.voxel(i);
    const TsdfVoxel& vb = b.voxel(i);
    const double ds = std::abs(va.sdf - vb.sdf);
    const double dw = std::abs(va.weight - vb.weight);
    const double scale_s = std::max({1.0, std::abs(va.sdf), std::abs(vb.sdf)});
    const double scale_w = std::max({1.0, va.weight, vb.weight});
    worst = std::max({worst, ds / scale_s, dw / scale_w});
  }
  return worst;
}

}  // namespace

TEST_CASE("compute_sdf direct substitution") {
  const Vec3 cam(0, 0, 0), surf(4, 0, 0);
  CHECK(compute_sdf(cam, surf, Vec3(3.8, 0, 0), 0.4) == doctest::Approx(0.2));
  // Off-axis center projects back onto the ray.
  CHECK(compute_sdf(cam, surf, Vec3(3.0, 0.3, 0), 0.4) == doctest::Approx(0.4));
  CHECK(compute_sdf(cam, surf, Vec3(4.3, 0, 0), 0.4) == doctest::Approx(-0.3));
}

TEST_CASE("compute_sdf rejects degenerate rays") {
  CHECK_THROWS_AS(compute_sdf(Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(0, 0, 0), 0.4),
                  std::invalid_argument);
}

TEST_CASE("compute_weight branches") {
  CHECK(compute_weight(2.0, 0.1, 0.4, 0.1, WeightPolicy::DepthScaled) == doctest::Approx(0.25));
  CHECK(compute_weight(2.0, -0.25, 0.4, 0.1, WeightPolicy::DepthScaled) ==
        doctest::Approx(0.125));
  CHECK(compute_weight(5.0, 0.0, 0.4, 0.1, WeightPolicy::Constant) == doctest::Approx(1.0));
  CHECK_THROWS_AS(compute_weight(0.0, 0.1, 0.4, 0.1, WeightPolicy::DepthScaled),
                  std::invalid_argument);
}

TEST_CASE("compute_weight is continuous at sdf == -resolution") {
  const double z = 3.0, delta = 0.4, res = 0.1;
  const double at = compute_weight(z, -res, delta, res, WeightPolicy::DepthScaled);
  const double left = compute_weight(z, -res - 1e-12, delta, res, WeightPolicy::DepthScaled);
  const double right = compute_weight(z, -res + 1e-12, delta, res, WeightPolicy::DepthScaled);
  CHECK(at == doctest::Approx(1.0 / 9.0));
  CHECK(std::abs(left - at) < 1e-9);
  CHECK(std::abs(right - at) < 1e-9);
}

TEST_CASE("voxel_state thresholds") {
  CHECK(voxel_state({0.1, 0.3}, 0.5) == VoxelState::Unknown);
  CHECK(voxel_state({0.1, 0.6}, 0.5) == VoxelState::Known);
  CHECK(voxel_state({0.1, 0.0}, 0.5) == VoxelState::Unobserved);
  // Boundary w == tau_w stays Unknown.
  CHECK(voxel_state({0.1, 0.5}, 0.5) == VoxelState::Unknown);
  CHECK_THROWS_AS(voxel_state({0.0, 0.1}, 0.0), std::invalid_argument);
}

TEST_CASE("weighted mean update on a single voxel") {
  // (sdf=0.2, w=1) + (sdf=0.4, w=1) -> (0.3, 2); algebra of the update rule
  // checked through a real integration below, here directly:
  const double sdf = (0.2 * 1.0 + 0.4 * 1.0) / (1.0 + 1.0);
  CHECK(sdf == doctest::Approx(0.3));
  // fresh voxel takes the observation verbatim
  const double fresh = (0.0 * 0.0 + 0.1 * 0.25) / (0.0 + 0.25);
  CHECK(fresh == doctest::Approx(0.1));
  // de-integration inverts: (0.3, 2) - (0.4, 1) -> (0.2, 1)
  const double inv = (0.3 * 2.0 - 0.4 * 1.0) / (2.0 - 1.0);
  CHECK(inv == doctest::Approx(0.2));
}

TEST_CASE("integrate then deintegrate restores the empty map") {
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(64, 64, 64), default_config());
  const VoxelMap empty = map;
  Rng rng(7);
  Frame f = random_frame(rng, 200, 2.5);
  map.integrate_frame(f);
  CHECK(f.integrated());
  map.deintegrate_frame(f);
  CHECK_FALSE(f.integrated());
  CHECK(map == empty);
}

TEST_CASE("integration state errors") {
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(32, 32, 32), default_config());
  Rng rng(3);
  Frame f = random_frame(rng, 10, 1.5);
  map.integrate_frame(f);
  CHECK_THROWS_AS(map.integrate_frame(f), std::logic_error);
  map.deintegrate_frame(f);
  CHECK_THROWS_AS(map.deintegrate_frame(f), std::logic_error);
}

TEST_CASE("empty point cloud integrates as a no-op") {
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(16, 16, 16), default_config());
  Frame f;
  f.pose.position = Vec3(0.8, 0.8, 0.8);
  const auto stats = map.integrate_frame(f);
  CHECK(stats.rays_cast == 0);
  CHECK(stats.voxels_touched == 0);
  CHECK(f.integrated());
}

TEST_CASE("pairwise inverse: deintegrating F1 from {F1,F2} equals F2 alone") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(64, 64, 64), default_config());
    Frame f1 = random_frame(rng, 150, 2.5);
    Frame f2 = random_frame(rng, 150, 2.5);
    map.integrate_frame(f1);
    map.integrate_frame(f2);
    map.deintegrate_frame(f1);

    VoxelMap alone(Vec3(0, 0, 0), Eigen::Vector3i(64, 64, 64), default_config());
    Frame f2_copy = f2;
    f2_copy.integrated_with.reset();
    alone.integrate_frame(f2_copy);
    CHECK(max_relative_voxel_difference(map, alone) < 1e-9);
  }
}

TEST_CASE("integration order commutes") {
  Rng rng(13);
  Frame a = random_frame(rng, 120, 2.0);
  Frame b = random_frame(rng, 120, 2.0);
  Frame c = random_frame(rng, 120, 2.0);

  VoxelMap m1(Vec3(0, 0, 0), Eigen::Vector3i(64, 64, 64), default_config());
  VoxelMap m2 = m1;
  Frame a1 = a, b1 = b, c1 = c;
  m1.integrate_frame(a1);
  m1.integrate_frame(b1);
  m1.integrate_frame(c1);
  Frame a2 = a, b2 = b, c2 = c;
  m2.integrate_frame(c2);
  m2.integrate_frame(a2);
  m2.integrate_frame(b2);
  CHECK(max_relative_voxel_difference(m1, m2) < 1e-9);
}

TEST_CASE("rectification equivalence: deintegrate/reintegrate equals direct build") {
  Rng rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<Frame> frames;
    std::vector<Pose4> rectified;
    for (int i = 0; i < 3; ++i) {
      frames.push_back(random_frame(rng, 100, 2.0));
      Pose4 fixed = frames.back().pose;
      fixed.position += Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0.0);
      fixed.yaw = wrap_angle(fixed.yaw + rng.uniform(-0.1, 0.1));
      rectified.push_back(fixed);
    }

    VoxelMap drifted(Vec3(0, 0, 0), Eigen::Vector3i(64, 64, 64), default_config());
    std::vector<Frame> live = frames;
    for (auto& f : live) drifted.integrate_frame(f);
    for (std::size_t i = 0; i < live.size(); ++i) {
      drifted.deintegrate_frame(live[i]);
      live[i].pose = rectified[i];
      drifted.integrate_frame(live[i]);
    }

    VoxelMap direct(Vec3(0, 0, 0), Eigen::Vector3i(64, 64, 64), default_config());
    std::vector<Frame> fresh = frames;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      fresh[i].pose = rectified[i];
      direct.integrate_frame(fresh[i]);
    }
    CHECK(max_relative_voxel_difference(drifted, direct) < 1e-9);
  }
}

TEST_CASE("truncation bound holds after integration") {
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(64, 64, 64), default_config());
  Rng rng(23);
  for (int i = 0; i < 4; ++i) {
    Frame f = random_frame(rng, 200, 2.5);
    map.integrate_frame(f);
  }
  for (std::size_t i = 0; i < map.cell_count(); ++i) {
    const TsdfVoxel& v = map.voxel(i);
    if (v.weight > 0.0) CHECK(std::abs(v.sdf) <= map.truncation() + 1e-12);
    CHECK(v.weight >= 0.0);
  }
}

TEST_CASE("iso-surface crossing at the midpoint of an antisymmetric edge") {
  VoxelMapConfig cfg = default_config();
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(4, 1, 1), cfg);
  map.voxel_mutable(map.linear_index({1, 0, 0})) = {0.1, 1.0};
  map.voxel_mutable(map.linear_index({2, 0, 0})) = {-0.1, 1.0};
  const auto points = map.sample_iso_surface(0.1);
  REQUIRE(points.size() == 1);
  const Vec3 mid = 0.5 * (map.cell_center({1, 0, 0}) + map.cell_center({2, 0, 0}));
  CHECK((points[0] - mid).norm() < 1e-12);
}

TEST_CASE("iso-surface of a flat wall scene stays within one cell of the plane") {
  // Wall at x = 2.0 observed head-on from x = 0.5.
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(40, 40, 20), default_config());
  Frame f;
  f.pose.position = Vec3(0.5, 2.0, 1.0);
  f.pose.yaw = 0.0;  // optical axis along +x
  const double wall_x = 2.0;
  for (double az = -0.5; az <= 0.5; az += 0.02) {
    for (double el = -0.35; el <= 0.35; el += 0.02) {
      const Vec3 d = direction_from_angles(az, el);
      // World direction equals body direction rotated by yaw 0: cam z -> +x.
      const double t = (wall_x - f.pose.position.x()) / d.z();
      f.points.push_back(d * t);
    }
  }
  map.integrate_frame(f);
  const auto points = map.sample_iso_surface(0.1);
  REQUIRE(!points.empty());
  for (const Vec3& p : points) CHECK(std::abs(p.x() - wall_x) <= map.resolution());
}

TEST_CASE("iso-surface of a map without sign changes is empty") {
  VoxelMap map(Vec3(0, 0, 0), Eigen::Vector3i(8, 8, 8), default_config());
  CHECK(map.sample_iso_surface(0.1).empty());
  for (std::size_t i = 0; i < map.cell_count(); ++i) map.voxel_mutable(i) = {0.2, 1.0};
  CHECK(map.sample_iso_surface(0.1).empty());
}

TEST_CASE("map dump round-trips through the binary format") {
  VoxelMap map(Vec3(1, 2, 3), Eigen::Vector3i(6, 5, 4), default_config());
  Rng rng(31);
  for (std::size_t i = 0; i < map.cell_count(); ++i) {
    const float sdf = static_cast<float>(rng.uniform(-0.4, 0.4));
    const float weight = static_cast<float>(rng.uniform(0.0, 3.0));
    map.voxel_mutable(i) = {sdf, weight};
  }
  const std::string path = "/tmp/exsim_test_dump.tsdf";
  write_map_dump(map, path);
  const VoxelMap loaded = read_map_dump(path);
  CHECK(loaded.dims() == map.dims());
  CHECK(loaded.resolution() == doctest::Approx(map.resolution()));
  CHECK(loaded.known_threshold() == doctest::Approx(map.known_threshold()));
  for (std::size_t i = 0; i < map.cell_count(); ++i) {
    CHECK(loaded.voxel(i).sdf == doctest::Approx(map.voxel(i).sdf));
    CHECK(loaded.voxel(i).weight == doctest::Approx(map.voxel(i).weight));
  }
}

TEST_CASE("ply round-trip") {
  std::vector<Vec3> pts = {{0.125, -1.5, 2.0}, {3.25, 4.5, -0.75}};
  const std::string path = "/tmp/exsim_test_points.ply";
  write_ply(pts, path);
  const auto loaded = read_ply(path);
  REQUIRE(loaded.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK((loaded[i] - pts[i]).norm() < 1e-5);
}
