// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mcop/exec.hpp"
#include "mcop/geometry.hpp"
#include "mcop/voxel_core.hpp"

namespace mcop {

/// Pinhole frustum sampled by a regular grid of rays.
struct CameraModel {
  Pose pose;                   // camera frame, +z is the optical axis
  double hfov = 1.0471975512;  // radians
  double vfov = 1.0471975512;
  int rays_per_axis = 128;

  /// FOV in (0, pi) and a valid pose (ConfigError); a ray budget < 1 is a
  /// ContractViolation.
  void validate() const;

  Vec3 axis() const { return pose.rotation * Vec3{0, 0, 1}; }
  /// Unnormalised world direction of ray (i, j), i along image x.
  Vec3 ray_direction(int i, int j) const;
};

/// Visits voxels along a ray in traversal order (Amanatides-Woo stepping, ties
/// broken x before y before z). The callback returns false to stop.
/// Returns the number of voxels visited.
std::size_t traverse_ray(const GridSpec& spec, Vec3 origin, Vec3 direction,
                         const std::function<bool(const VoxelIndex&, std::size_t linear)>& visit);

/// A voxel is visible iff some sampled ray reaches it before any occupied
/// voxel; the first occupied voxel on a ray is itself visible.
Mask3D raycast_visibility(const OccupancyGrid& grid, const CameraModel& cam, Exec exec = Exec::Parallel);

}  // namespace mcop
