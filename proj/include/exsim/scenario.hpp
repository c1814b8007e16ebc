#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exsim/geometry.hpp"
#include "exsim/voxel_map.hpp"

namespace exsim {

struct SensorSpec {
  double fov_h_deg = 80.0;
  double fov_v_deg = 60.0;
  double max_range = 4.5;
  int rays_h = 48;
  int rays_v = 36;
};

struct MotionLimits {
  double v_max = 2.0;
  double a_max = 2.0;
  double yaw_rate_max = 0.9;
};

// A bounded synthetic world: axis-aligned box obstacles inside a bounding
// box whose inner faces act as walls.
struct Scenario {
  std::string name = "custom";
  Aabb bounds;
  std::vector<Aabb> obstacles;
  Pose4 start;
  SensorSpec sensor;
  MotionLimits limits;
  std::uint64_t seed = 0;

  // True when p is within `clearance` of an obstacle or outside the walls.
  bool collides(const Vec3& p, double clearance) const;

  // Uniform sampling of all visible obstacle and boundary faces.
  std::vector<Vec3> ground_truth_cloud(double spacing) const;

  // Throws std::invalid_argument when invariants are violated (start in
  // collision, obstacles outside bounds, empty ground truth).
  void validate() const;

  static Scenario preset(const std::string& name);  // "room", "maze", "hall"
  static Scenario from_json_file(const std::string& path);
  void to_json_file(const std::string& path) const;
  std::string to_json_string() const;
  static Scenario from_json_string(const std::string& text);
};

// Casts one ray per grid cell over the FOV from the true pose; each ray
// yields the nearest obstacle/boundary hit within max range as a
// camera-frame point. The returned frame has no pose attached.
Frame render_depth(const Pose4& true_pose, const Scenario& scenario, const SensorSpec& sensor);

}  // namespace exsim
