#include "exsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace exsim {

namespace {

using nlohmann::ordered_json;

// Samples one axis-aligned rectangle (normal along `axis` at coordinate
// `level`) on a fixed lattice, dropping points buried inside obstacles.
void sample_face(std::vector<Vec3>& out, const Scenario& scenario, int axis, double level,
                 const Vec3& lo, const Vec3& hi, double spacing) {
  const int u = (axis + 1) % 3;
  const int v = (axis + 2) % 3;
  const int nu = std::max(1, static_cast<int>(std::round((hi[u] - lo[u]) / spacing)));
  const int nv = std::max(1, static_cast<int>(std::round((hi[v] - lo[v]) / spacing)));
  for (int i = 0; i <= nu; ++i)
    for (int j = 0; j <= nv; ++j) {
      Vec3 p;
      p[axis] = level;
      p[u] = lo[u] + (hi[u] - lo[u]) * i / nu;
      p[v] = lo[v] + (hi[v] - lo[v]) * j / nv;
      if (!scenario.bounds.contains(p)) continue;
      bool buried = false;
      for (const auto& box : scenario.obstacles) {
        // Strictly inside (not on the surface of) another obstacle.
        if (p.x() > box.min.x() + 1e-9 && p.x() < box.max.x() - 1e-9 &&
            p.y() > box.min.y() + 1e-9 && p.y() < box.max.y() - 1e-9 &&
            p.z() > box.min.z() + 1e-9 && p.z() < box.max.z() - 1e-9) {
          buried = true;
          break;
        }
      }
      if (!buried) out.push_back(p);
    }
}

ordered_json aabb_to_json(const Aabb& box) {
  return ordered_json{{"min", {box.min.x(), box.min.y(), box.min.z()}},
                      {"max", {box.max.x(), box.max.y(), box.max.z()}}};
}

Aabb aabb_from_json(const ordered_json& j) {
  Aabb box;
  for (int a = 0; a < 3; ++a) {
    box.min[a] = j.at("min").at(a).get<double>();
    box.max[a] = j.at("max").at(a).get<double>();
  }
  return box;
}

}  // namespace

bool Scenario::collides(const Vec3& p, double clearance) const {
  for (int a = 0; a < 3; ++a)
    if (p[a] < bounds.min[a] + clearance || p[a] > bounds.max[a] - clearance) return true;
  for (const auto& box : obstacles)
    if (box.distance(p) < clearance) return true;
  return false;
}

std::vector<Vec3> Scenario::ground_truth_cloud(double spacing) const {
  std::vector<Vec3> out;
  for (const auto& box : obstacles) {
    sample_face(out, *this, 0, box.min.x(), box.min, box.max, spacing);
    sample_face(out, *this, 0, box.max.x(), box.min, box.max, spacing);
    sample_face(out, *this, 1, box.min.y(), box.min, box.max, spacing);
    sample_face(out, *this, 1, box.max.y(), box.min, box.max, spacing);
    sample_face(out, *this, 2, box.min.z(), box.min, box.max, spacing);
    sample_face(out, *this, 2, box.max.z(), box.min, box.max, spacing);
  }
  // Inner boundary walls.
  sample_face(out, *this, 0, bounds.min.x(), bounds.min, bounds.max, spacing);
  sample_face(out, *this, 0, bounds.max.x(), bounds.min, bounds.max, spacing);
  sample_face(out, *this, 1, bounds.min.y(), bounds.min, bounds.max, spacing);
  sample_face(out, *this, 1, bounds.max.y(), bounds.min, bounds.max, spacing);
  sample_face(out, *this, 2, bounds.min.z(), bounds.min, bounds.max, spacing);
  sample_face(out, *this, 2, bounds.max.z(), bounds.min, bounds.max, spacing);
  return out;
}

void Scenario::validate() const {
  if (bounds.extent().minCoeff() <= 0.0)
    throw std::invalid_argument("scenario: bounds must have positive extent");
  for (const auto& box : obstacles)
    if (!box.inside(bounds)) throw std::invalid_argument("scenario: obstacle outside bounds");
  if (collides(start.position, 0.05))
    throw std::invalid_argument("scenario: start pose is in collision");
  if (sensor.max_range <= 0.0 || sensor.rays_h < 1 || sensor.rays_v < 1)
    throw std::invalid_argument("scenario: bad sensor spec");
  if (limits.v_max <= 0.0 || limits.a_max <= 0.0 || limits.yaw_rate_max <= 0.0)
    throw std::invalid_argument("scenario: bad motion limits");
}

Scenario Scenario::preset(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "room") {
    // 8 x 8 x 3 smoke-test room with two boxes.
    s.bounds = {{0.0, 0.0, 0.0}, {8.0, 8.0, 3.0}};
    s.obstacles = {
        {{3.0, 3.0, 0.0}, {4.0, 4.0, 2.0}},
        {{6.0, 1.0, 0.0}, {7.0, 2.0, 3.0}},
    };
    s.start = {{1.5, 1.5, 1.5}, 0.0};
  } else if (name == "maze") {
    // 20 x 16 x 3 loop-friendly maze: a central island ring plus side slabs,
    // corridors everywhere at least 3 m wide.
    s.bounds = {{0.0, 0.0, 0.0}, {20.0, 16.0, 3.0}};
    s.obstacles = {
        {{5.0, 5.0, 0.0}, {15.0, 11.0, 3.0}},   // central island
        {{0.0, 14.5, 0.0}, {8.0, 16.0, 3.0}},   // top-left slab
        {{12.0, 0.0, 0.0}, {20.0, 1.5, 3.0}},   // bottom-right slab
        {{8.5, 2.5, 0.0}, {9.5, 3.5, 2.0}},     // low pillar, bottom corridor
        {{17.0, 7.0, 0.0}, {18.0, 8.0, 3.0}},   // pillar, right corridor
    };
    s.start = {{2.0, 2.0, 1.5}, 0.0};
  } else if (name == "hall") {
    // 30 x 16 x 3 hall with scattered pillars.
    s.bounds = {{0.0, 0.0, 0.0}, {30.0, 16.0, 3.0}};
    s.obstacles = {
        {{6.0, 4.0, 0.0}, {7.5, 5.5, 3.0}},   {{6.0, 10.5, 0.0}, {7.5, 12.0, 3.0}},
        {{13.0, 7.0, 0.0}, {14.5, 9.0, 3.0}}, {{20.0, 3.5, 0.0}, {21.5, 5.0, 3.0}},
        {{20.0, 11.0, 0.0}, {21.5, 12.5, 3.0}}, {{26.0, 7.0, 0.0}, {27.0, 9.0, 2.0}},
    };
    s.start = {{2.0, 8.0, 1.5}, 0.0};
  } else {
    throw std::invalid_argument("unknown scenario preset: " + name);
  }
  s.validate();
  return s;
}

std::string Scenario::to_json_string() const {
  ordered_json j;
  j["name"] = name;
  j["bounds"] = aabb_to_json(bounds);
  j["obstacles"] = ordered_json::array();
  for (const auto& box : obstacles) j["obstacles"].push_back(aabb_to_json(box));
  j["start"] = {{"position", {start.position.x(), start.position.y(), start.position.z()}},
                {"yaw", start.yaw}};
  j["sensor"] = {{"fov_h_deg", sensor.fov_h_deg}, {"fov_v_deg", sensor.fov_v_deg},
                 {"max_range", sensor.max_range}, {"rays_h", sensor.rays_h},
                 {"rays_v", sensor.rays_v}};
  j["limits"] = {{"v_max", limits.v_max}, {"a_max", limits.a_max},
                 {"yaw_rate_max", limits.yaw_rate_max}};
  j["seed"] = seed;
  return j.dump(2);
}

Scenario Scenario::from_json_string(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  Scenario s;
  s.name = j.value("name", std::string("custom"));
  s.bounds = aabb_from_json(j.at("bounds"));
  for (const auto& jb : j.at("obstacles")) s.obstacles.push_back(aabb_from_json(jb));
  for (int a = 0; a < 3; ++a) s.start.position[a] = j.at("start").at("position").at(a).get<double>();
  s.start.yaw = j.at("start").at("yaw").get<double>();
  const auto& js = j.at("sensor");
  s.sensor = {js.at("fov_h_deg").get<double>(), js.at("fov_v_deg").get<double>(),
              js.at("max_range").get<double>(), js.at("rays_h").get<int>(),
              js.at("rays_v").get<int>()};
  const auto& jl = j.at("limits");
  s.limits = {jl.at("v_max").get<double>(), jl.at("a_max").get<double>(),
              jl.at("yaw_rate_max").get<double>()};
  s.seed = j.value("seed", 0ull);
  s.validate();
  return s;
}

Scenario Scenario::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

void Scenario::to_json_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("scenario: cannot write " + path);
  out << to_json_string() << "\n";
}

Frame render_depth(const Pose4& true_pose, const Scenario& scenario, const SensorSpec& sensor) {
  Frame frame;
  const double half_h = deg_to_rad(sensor.fov_h_deg) / 2.0;
  const double half_v = deg_to_rad(sensor.fov_v_deg) / 2.0;
  const Eigen::Matrix3d rot = true_pose.rotation();
  const Vec3 cam = true_pose.position;

  frame.points.reserve(static_cast<std::size_t>(sensor.rays_h) * sensor.rays_v);
  for (int i = 0; i < sensor.rays_h; ++i) {
    const double az = -half_h + (i + 0.5) * (2.0 * half_h) / sensor.rays_h;
    for (int j = 0; j < sensor.rays_v; ++j) {
      const double el = -half_v + (j + 0.5) * (2.0 * half_v) / sensor.rays_v;
      const Vec3 dir_cam = direction_from_angles(az, el);
      const Vec3 dir = rot * dir_cam;

      double t_hit = std::numeric_limits<double>::infinity();
      double t0, t1;
      // Boundary walls: the camera is inside the bounds box, the exit point
      // is the wall hit.
      if (ray_box_intersect(cam, dir, scenario.bounds, t0, t1) && t1 > 0.0) t_hit = t1;
      for (const auto& box : scenario.obstacles) {
        if (!ray_box_intersect(cam, dir, box, t0, t1)) continue;
        if (t1 <= 1e-9) continue;  // behind the camera
        const double entry = std::max(t0, 0.0);
        t_hit = std::min(t_hit, entry);
      }
      if (t_hit <= sensor.max_range) frame.points.push_back(dir_cam * t_hit);
    }
  }
  return frame;
}

}  // namespace exsim
