#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

namespace smal {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Unit vector of v. The caller guarantees v is not (near) zero.
inline Vec3 unit(const Vec3& v) { return v / v.norm(); }

/// Angle between two vectors in [0, pi], stable near 0 and pi.
inline double angle_between(const Vec3& a, const Vec3& b) {
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Rotation of v by angle about a unit axis.
inline Vec3 rotate_about(const Vec3& axis, double angle, const Vec3& v) {
    return Eigen::AngleAxisd(angle, axis) * v;
}

}  // namespace smal
