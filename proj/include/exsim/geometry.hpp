#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace exsim {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

// Absolute wrapped yaw difference, in [0, pi].
inline double yaw_distance(double a, double b) {
  return std::abs(wrap_angle(a - b));
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// 4-DOF camera/body pose: position plus yaw, pitch and roll fixed at zero.
// Camera frame is the usual optical convention (z forward along the optical
// axis, x right, y down); the optical axis points along yaw in the world
// x-y plane.
struct Pose4 {
  Vec3 position{0.0, 0.0, 0.0};
  double yaw = 0.0;

  // Camera-to-world rotation.
  Eigen::Matrix3d rotation() const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    Eigen::Matrix3d rz;
    rz << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    // Optical axes expressed in the yaw-zero body frame:
    // cam x (right) -> -y, cam y (down) -> -z, cam z (forward) -> +x.
    Eigen::Matrix3d r0;
    r0 << 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0;
    return rz * r0;
  }

  Vec3 camera_to_world(const Vec3& p_cam) const {
    return position + rotation() * p_cam;
  }

  Vec3 world_to_camera(const Vec3& p_world) const {
    return rotation().transpose() * (p_world - position);
  }
};

// Azimuth (right positive) and elevation (up positive) of a camera-frame
// direction, radians.
inline double azimuth_of(const Vec3& d_cam) { return std::atan2(d_cam.x(), d_cam.z()); }
inline double elevation_of(const Vec3& d_cam) { return std::atan2(-d_cam.y(), d_cam.z()); }

// Unit camera-frame direction with the given azimuth/elevation.
inline Vec3 direction_from_angles(double azimuth, double elevation) {
  Vec3 d(std::tan(azimuth), -std::tan(elevation), 1.0);
  return d.normalized();
}

// Axis-aligned box.
struct Aabb {
  Vec3 min{0.0, 0.0, 0.0};
  Vec3 max{0.0, 0.0, 0.0};

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }

  bool contains(const Vec3& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y() && p.z() >= min.z() && p.z() <= max.z();
  }

  // Euclidean distance from p to the box (0 inside).
  double distance(const Vec3& p) const {
    Vec3 d = (min - p).cwiseMax(p - max).cwiseMax(Vec3::Zero());
    return d.norm();
  }

  bool inside(const Aabb& outer) const {
    return outer.contains(min) && outer.contains(max);
  }
};

// Entry/exit parameters of ray origin + t*dir against a box (slab method).
// Returns false if the ray misses. On success t0 <= t1 bound the overlap.
inline bool ray_box_intersect(const Vec3& origin, const Vec3& dir, const Aabb& box,
                              double& t0, double& t1) {
  t0 = -std::numeric_limits<double>::infinity();
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return false;
      continue;
    }
    double inv = 1.0 / dir[a];
    double ta = (box.min[a] - origin[a]) * inv;
    double tb = (box.max[a] - origin[a]) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace exsim
