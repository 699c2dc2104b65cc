// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/raycast.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

#include "mcop/errors.hpp"

namespace mcop {

void CameraModel::validate() const {
  pose.validate();
  if (!(hfov > 0.0 && hfov < std::numbers::pi)) throw ConfigError("camera hfov must be in (0, pi)");
  if (!(vfov > 0.0 && vfov < std::numbers::pi)) throw ConfigError("camera vfov must be in (0, pi)");
  if (rays_per_axis < 1) throw ContractViolation("camera ray budget must be >= 1");
}

Vec3 CameraModel::ray_direction(int i, int j) const {
  const double n = rays_per_axis;
  const double u = std::tan(hfov / 2) * (2.0 * (i + 0.5) / n - 1.0);
  const double v = std::tan(vfov / 2) * (2.0 * (j + 0.5) / n - 1.0);
  return pose.rotation * Vec3{u, v, 1.0};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Amanatides & Woo stepping in voxel units. Visit returns false to stop.
template <typename Visit>
std::size_t walk(const GridSpec& spec, Vec3 origin, Vec3 dir, Visit&& visit) {
  const std::array<std::int64_t, 3> n = {spec.nx, spec.ny, spec.nz};
  const Vec3 o = (origin - spec.origin) * (1.0 / spec.voxel_size);

  // Slab clip against [0, n] on every axis.
  double t_enter = 0.0, t_exit = kInf;
  for (int a = 0; a < 3; ++a) {
    const double hi = static_cast<double>(n[static_cast<std::size_t>(a)]);
    if (dir[a] == 0.0) {
      if (o[a] < 0.0 || o[a] >= hi) return 0;
      continue;
    }
    double t0 = (0.0 - o[a]) / dir[a], t1 = (hi - o[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (!(t_enter < t_exit)) return 0;

  std::array<std::int64_t, 3> cell{}, step{};
  std::array<double, 3> t_max{}, t_delta{};
  for (int a = 0; a < 3; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double p = o[a] + t_enter * dir[a];
    cell[ua] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(p)), 0, n[ua] - 1);
    if (dir[a] > 0.0) {
      step[ua] = 1;
      t_max[ua] = (static_cast<double>(cell[ua] + 1) - o[a]) / dir[a];
      t_delta[ua] = 1.0 / dir[a];
    } else if (dir[a] < 0.0) {
      step[ua] = -1;
      t_max[ua] = (static_cast<double>(cell[ua]) - o[a]) / dir[a];
      t_delta[ua] = -1.0 / dir[a];
    } else {
      step[ua] = 0;
      t_max[ua] = kInf;
      t_delta[ua] = kInf;
    }
  }

  std::size_t visited = 0;
  for (;;) {
    ++visited;
    const VoxelIndex idx{cell[0], cell[1], cell[2]};
    if (!visit(idx, spec.linear(idx))) break;
    std::size_t a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    if (t_max[a] >= t_exit) break;
    cell[a] += step[a];
    if (cell[a] < 0 || cell[a] >= n[a]) break;
    t_max[a] += t_delta[a];
  }
  return visited;
}

template <bool kAtomic>
void cast_one(const OccupancyGrid& grid, const CameraModel& cam, int i, int j, std::uint8_t* bits) {
  const auto labels = grid.labels();
  walk(grid.spec(), cam.pose.translation, cam.ray_direction(i, j), [&](const VoxelIndex&, std::size_t linear) {
    if constexpr (kAtomic) {
      std::atomic_ref<std::uint8_t>(bits[linear]).store(1, std::memory_order_relaxed);
    } else {
      bits[linear] = 1;
    }
    return labels[linear] == 0;
  });
}

}  // namespace

std::size_t traverse_ray(const GridSpec& spec, Vec3 origin, Vec3 direction,
                         const std::function<bool(const VoxelIndex&, std::size_t)>& visit) {
  return walk(spec, origin, direction, visit);
}

Mask3D raycast_visibility(const OccupancyGrid& grid, const CameraModel& cam, Exec exec) {
  cam.validate();
  Mask3D mask(grid.spec());
  std::uint8_t* bits = mask.raw();
  const int n = cam.rays_per_axis;
  const std::int64_t total = static_cast<std::int64_t>(n) * n;
  if (exec == Exec::Serial) {
    for (std::int64_t r = 0; r < total; ++r) cast_one<false>(grid, cam, static_cast<int>(r / n), static_cast<int>(r % n), bits);
  } else {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t r = 0; r < total; ++r) cast_one<true>(grid, cam, static_cast<int>(r / n), static_cast<int>(r % n), bits);
  }
  return mask;
}

}  // namespace mcop
