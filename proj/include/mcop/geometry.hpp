// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>

namespace mcop {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return a * (1.0 / norm(a)); }

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

  static Mat3 identity() { return {}; }
  static Mat3 rot_x(double rad);
  static Mat3 rot_z(double rad);

  Mat3 transposed() const;
  double determinant() const;

  friend Mat3 operator*(const Mat3& a, const Mat3& b);
  friend Vec3 operator*(const Mat3& a, Vec3 v);
  friend bool operator==(const Mat3&, const Mat3&) = default;
};

/// Rigid transform from a body frame into the world frame.
///
/// For UAV cameras the body frame is the camera frame: +z is the optical axis,
/// +x and +y span the image plane. The UAV altitude used by quality scoring is
/// the vertical translation above the grid ground plane.
struct Pose {
  Mat3 rotation;
  Vec3 translation;

  /// Throws ConfigError unless rotation is orthonormal with det +1 (1e-9).
  void validate() const;

  Vec3 apply(Vec3 body) const { return rotation * body + translation; }

  /// Heading of the body x axis projected on the horizontal plane.
  double yaw() const;

  /// Camera looking straight down, image x along world x, then yawed about
  /// world z and tilted by `tilt` about the camera x axis.
  static Pose nadir_camera(Vec3 position, double yaw_rad, double tilt_rad = 0.0);

  /// Planar frame: rotation about world z plus horizontal translation.
  static Pose planar(double yaw_rad, double tx, double ty);

  friend bool operator==(const Pose&, const Pose&) = default;
};

}  // namespace mcop
