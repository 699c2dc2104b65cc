// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/geometry.hpp"

#include <cmath>

#include "mcop/errors.hpp"

namespace mcop {

Mat3 Mat3::rot_x(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 r;
  r.m = {1, 0, 0, 0, c, -s, 0, s, c};
  return r;
}

Mat3 Mat3::rot_z(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 r;
  r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
  return t;
}

double Mat3::determinant() const {
  const auto& a = *this;
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

Vec3 operator*(const Mat3& a, Vec3 v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

void Pose::validate() const {
  constexpr double kTol = 1e-9;
  const Mat3 rtr = rotation.transposed() * rotation;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const double expect = r == c ? 1.0 : 0.0;
      if (!(std::abs(rtr(r, c) - expect) <= kTol))
        throw ConfigError("pose rotation is not orthonormal");
    }
  if (!(std::abs(rotation.determinant() - 1.0) <= kTol))
    throw ConfigError("pose rotation determinant is not +1");
  if (!std::isfinite(translation.x) || !std::isfinite(translation.y) || !std::isfinite(translation.z))
    throw ConfigError("pose translation is not finite");
}

double Pose::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

Pose Pose::nadir_camera(Vec3 position, double yaw_rad, double tilt_rad) {
  // Base orientation: camera x = world x, camera y = -world y, optical axis = -world z.
  Mat3 nadir;
  nadir.m = {1, 0, 0, 0, -1, 0, 0, 0, -1};
  return {Mat3::rot_z(yaw_rad) * nadir * Mat3::rot_x(tilt_rad), position};
}

Pose Pose::planar(double yaw_rad, double tx, double ty) {
  return {Mat3::rot_z(yaw_rad), {tx, ty, 0.0}};
}

}  // namespace mcop
