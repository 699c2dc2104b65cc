// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <vector>

#include "mcop/voxel_core.hpp"

namespace mcop {

/// Procedural city layout. Lengths are meters; densities are fractions.
struct SceneParams {
  std::uint64_t seed = 0;
  double building_density = 0.35;   // footprint coverage of each city block
  double vegetation_density = 0.2;   // bushes/trees per 100 m^2 of free lot area
  std::int64_t vehicle_count = 12;   // also spawns vehicle_count / 2 street poles ("others")
  double road_grid_pitch = 24.0;     // road centerline spacing; <= 0 disables roads
  double target_occupancy_fraction = 0.05;

  void validate() const;  // throws ConfigError
};

/// Deterministic function of (spec, params). The z = 0 layer is ground or
/// urban road; buildings, vegetation, vehicles and poles stand on it.
/// Building heights are fitted so that the occupied fraction lands as close as
/// possible to target_occupancy_fraction.
OccupancyGrid generate_scene(const GridSpec& spec, const SceneParams& params);

struct LabeledPoint {
  Vec3 position;
  std::uint8_t label = 0;
};

/// Parses `x y z label` lines; '#' starts a comment. Throws ParseError.
std::vector<LabeledPoint> parse_point_cloud(std::istream& in);

/// Majority label per voxel, ties to the lowest class id, empty voxels free.
/// Points outside the grid are ignored.
OccupancyGrid voxelize_point_cloud(std::span<const LabeledPoint> points, const GridSpec& spec);

}  // namespace mcop
