// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_map>

#include "mcop/errors.hpp"
#include "mcop/rng.hpp"

namespace mcop {

void SceneParams::validate() const {
  std::vector<std::string> issues;
  if (!(building_density >= 0.0 && building_density <= 1.0)) issues.emplace_back("scene.building_density must be in [0,1]");
  if (!(vegetation_density >= 0.0) || !std::isfinite(vegetation_density))
    issues.emplace_back("scene.vegetation_density must be >= 0");
  if (vehicle_count < 0) issues.emplace_back("scene.vehicle_count must be >= 0");
  if (!std::isfinite(road_grid_pitch)) issues.emplace_back("scene.road_grid_pitch must be finite");
  if (!(target_occupancy_fraction > 0.0 && target_occupancy_fraction < 1.0))
    issues.emplace_back("scene.target_occupancy_fraction must be in (0,1)");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

namespace {

struct Rect {
  std::int64_t x0, y0, x1, y1;  // half-open
  std::int64_t area() const { return (x1 - x0) * (y1 - y0); }
  bool overlaps(const Rect& o, std::int64_t gap) const {
    return x0 < o.x1 + gap && o.x0 < x1 + gap && y0 < o.y1 + gap && o.y0 < y1 + gap;
  }
};

class Layout {
 public:
  Layout(const GridSpec& spec, const SceneParams& p) : spec_(spec), p_(p), rng_(p.seed), grid_(spec) {
    const double s = spec.voxel_size;
    if (p.road_grid_pitch > 0.0) {
      pitch_ = std::max<std::int64_t>(2, std::llround(p.road_grid_pitch / s));
      road_width_ = std::max<std::int64_t>(1, std::llround(static_cast<double>(pitch_) * 0.2));
    }
    footprint_.assign(spec.cell_count(), 0);
  }

  OccupancyGrid build() {
    lay_ground();
    if (spec_.nz < 2) return std::move(grid_);
    place_building_footprints();
    place_vegetation();
    place_vehicles();
    place_poles();
    raise_buildings();
    return std::move(grid_);
  }

 private:
  bool is_road(std::int64_t x, std::int64_t y) const {
    if (pitch_ == 0) return false;
    return (x % pitch_) < road_width_ || (y % pitch_) < road_width_;
  }
  std::int64_t meters(double m) const { return std::max<std::int64_t>(1, std::llround(m / spec_.voxel_size)); }

  void lay_ground() {
    for (std::int64_t x = 0; x < spec_.nx; ++x)
      for (std::int64_t y = 0; y < spec_.ny; ++y)
        grid_.set(x, y, 0, is_road(x, y) ? SemanticClass::kUrbanRoad : SemanticClass::kGround);
  }

  // City blocks are the lot rectangles between road stripes.
  std::vector<Rect> blocks() const {
    std::vector<Rect> out;
    if (pitch_ == 0) {
      out.push_back({0, 0, spec_.nx, spec_.ny});
      return out;
    }
    for (std::int64_t bx = 0; bx < spec_.nx; bx += pitch_)
      for (std::int64_t by = 0; by < spec_.ny; by += pitch_) {
        Rect r{bx + road_width_, by + road_width_, std::min(bx + pitch_, spec_.nx), std::min(by + pitch_, spec_.ny)};
        if (r.x1 > r.x0 && r.y1 > r.y0) out.push_back(r);
      }
    return out;
  }

  void place_building_footprints() {
    if (p_.building_density <= 0.0) return;
    for (const Rect& block : blocks()) {
      // One-voxel setback from the road.
      const Rect lot{block.x0 + 1, block.y0 + 1, block.x1 - 1, block.y1 - 1};
      if (lot.x1 - lot.x0 < 2 || lot.y1 - lot.y0 < 2) continue;
      const double want = p_.building_density * static_cast<double>(lot.area());
      std::int64_t covered = 0;
      std::vector<Rect> placed;
      for (int attempt = 0; attempt < 200 && static_cast<double>(covered) < want; ++attempt) {
        const std::int64_t max_w = std::max<std::int64_t>(2, (lot.x1 - lot.x0) / 2);
        const std::int64_t max_h = std::max<std::int64_t>(2, (lot.y1 - lot.y0) / 2);
        const std::int64_t w = rng_.uniform_int(std::min<std::int64_t>(2, max_w), max_w);
        const std::int64_t h = rng_.uniform_int(std::min<std::int64_t>(2, max_h), max_h);
        if (w > lot.x1 - lot.x0 || h > lot.y1 - lot.y0) continue;
        const std::int64_t x0 = rng_.uniform_int(lot.x0, lot.x1 - w);
        const std::int64_t y0 = rng_.uniform_int(lot.y0, lot.y1 - h);
        const Rect r{x0, y0, x0 + w, y0 + h};
        if (std::any_of(placed.begin(), placed.end(), [&](const Rect& o) { return r.overlaps(o, 1); })) continue;
        placed.push_back(r);
        covered += r.area();
      }
      for (const Rect& r : placed) {
        buildings_.push_back({r, rng_.uniform(0.3, 1.0)});
        for (std::int64_t x = r.x0; x < r.x1; ++x)
          for (std::int64_t y = r.y0; y < r.y1; ++y) footprint_[spec_.cell(x, y)] = 1;
      }
    }
  }

  void place_vegetation() {
    if (p_.vegetation_density <= 0.0) return;
    std::int64_t free_lot = 0;
    for (std::int64_t x = 0; x < spec_.nx; ++x)
      for (std::int64_t y = 0; y < spec_.ny; ++y)
        if (!is_road(x, y) && !footprint_[spec_.cell(x, y)]) ++free_lot;
    const double area_m2 = static_cast<double>(free_lot) * spec_.voxel_size * spec_.voxel_size;
    const auto count = static_cast<std::int64_t>(std::llround(p_.vegetation_density * area_m2 / 100.0));
    const double s = spec_.voxel_size;
    for (std::int64_t k = 0; k < count; ++k) {
      const double cx = rng_.uniform(0.0, static_cast<double>(spec_.nx));
      const double cy = rng_.uniform(0.0, static_cast<double>(spec_.ny));
      const double rxy = rng_.uniform(1.0, 2.5) / s;  // horizontal radius, voxels
      const double rz = rng_.uniform(1.0, 3.0) / s;   // vertical semi-axis, voxels
      const auto cxi = static_cast<std::int64_t>(cx), cyi = static_cast<std::int64_t>(cy);
      if (is_road(cxi, cyi) || footprint_[spec_.cell(cxi, cyi)]) continue;
      // Ellipsoid resting on the ground plane.
      const double cz = 1.0 + rz;
      const auto r = static_cast<std::int64_t>(std::ceil(rxy));
      for (std::int64_t x = std::max<std::int64_t>(0, cxi - r); x <= std::min(spec_.nx - 1, cxi + r); ++x)
        for (std::int64_t y = std::max<std::int64_t>(0, cyi - r); y <= std::min(spec_.ny - 1, cyi + r); ++y) {
          if (is_road(x, y) || footprint_[spec_.cell(x, y)]) continue;
          for (std::int64_t z = 1; z < spec_.nz; ++z) {
            const double dx = (static_cast<double>(x) + 0.5 - cx) / rxy;
            const double dy = (static_cast<double>(y) + 0.5 - cy) / rxy;
            const double dz = (static_cast<double>(z) + 0.5 - cz) / rz;
            if (dx * dx + dy * dy + dz * dz <= 1.0 && grid_.at(x, y, z) == 0)
              grid_.set(x, y, z, SemanticClass::kVegetation);
          }
        }
    }
  }

  void place_vehicles() {
    if (pitch_ == 0) return;
    const std::int64_t len = meters(4.5), wid = meters(2.0), hgt = std::min(meters(1.6), spec_.nz - 1);
    std::vector<Rect> placed;
    for (std::int64_t k = 0, attempts = 0; k < p_.vehicle_count && attempts < 50 * (p_.vehicle_count + 1); ++attempts) {
      const bool along_x = rng_.uniform() < 0.5;
      const std::int64_t w = along_x ? len : wid, h = along_x ? wid : len;
      if (w > spec_.nx || h > spec_.ny) break;
      const std::int64_t x0 = rng_.uniform_int(0, spec_.nx - w);
      const std::int64_t y0 = rng_.uniform_int(0, spec_.ny - h);
      const Rect r{x0, y0, x0 + w, y0 + h};
      bool on_road = true;
      for (std::int64_t x = r.x0; x < r.x1 && on_road; ++x)
        for (std::int64_t y = r.y0; y < r.y1 && on_road; ++y) on_road = is_road(x, y);
      if (!on_road) continue;
      if (std::any_of(placed.begin(), placed.end(), [&](const Rect& o) { return r.overlaps(o, 1); })) continue;
      placed.push_back(r);
      for (std::int64_t x = r.x0; x < r.x1; ++x)
        for (std::int64_t y = r.y0; y < r.y1; ++y)
          for (std::int64_t z = 1; z <= hgt; ++z) grid_.set(x, y, z, SemanticClass::kVehicle);
      ++k;
    }
  }

  void place_poles() {
    const std::int64_t count = p_.vehicle_count / 2;
    const std::int64_t hgt = std::min(meters(3.0), spec_.nz - 1);
    for (std::int64_t k = 0, attempts = 0; k < count && attempts < 50 * (count + 1); ++attempts) {
      const std::int64_t x = rng_.uniform_int(0, spec_.nx - 1), y = rng_.uniform_int(0, spec_.ny - 1);
      if (is_road(x, y) || footprint_[spec_.cell(x, y)] || grid_.at(x, y, 1) != 0) continue;
      for (std::int64_t z = 1; z <= hgt; ++z)
        if (grid_.at(x, y, z) == 0) grid_.set(x, y, z, SemanticClass::kOthers);
      ++k;
    }
  }

  std::int64_t building_voxels(double scale) const {
    std::int64_t total = 0;
    for (const auto& b : buildings_) total += b.rect.area() * height_for(b.weight, scale);
    return total;
  }
  std::int64_t height_for(double weight, double scale) const {
    const std::int64_t max_h = spec_.nz - 1;
    return std::clamp<std::int64_t>(std::llround(scale * weight * static_cast<double>(max_h)), 1, max_h);
  }

  // Binary search a global height scale so the total occupied count lands on target.
  void raise_buildings() {
    if (buildings_.empty()) return;
    const auto other = static_cast<std::int64_t>(grid_.occupied_count());
    const auto want =
        static_cast<std::int64_t>(std::llround(p_.target_occupancy_fraction * static_cast<double>(spec_.voxel_count()))) - other;
    double lo = 0.0, hi = 4.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (building_voxels(mid) < want ? lo : hi) = mid;
    }
    const double scale = std::abs(building_voxels(lo) - want) <= std::abs(building_voxels(hi) - want) ? lo : hi;
    for (const auto& b : buildings_) {
      const std::int64_t h = height_for(b.weight, scale);
      for (std::int64_t x = b.rect.x0; x < b.rect.x1; ++x)
        for (std::int64_t y = b.rect.y0; y < b.rect.y1; ++y)
          for (std::int64_t z = 1; z <= h; ++z) grid_.set(x, y, z, SemanticClass::kBuilding);
    }
  }

  struct Building {
    Rect rect;
    double weight;
  };

  const GridSpec& spec_;
  const SceneParams& p_;
  Rng rng_;
  OccupancyGrid grid_;
  std::int64_t pitch_ = 0;
  std::int64_t road_width_ = 0;
  std::vector<std::uint8_t> footprint_;
  std::vector<Building> buildings_;
};

}  // namespace

OccupancyGrid generate_scene(const GridSpec& spec, const SceneParams& params) {
  spec.validate();
  params.validate();
  if (spec.nz < 2) throw ConfigError("grid needs nz >= 2 to hold the ground plane and objects above it");
  return Layout(spec, params).build();
}

std::vector<LabeledPoint> parse_point_cloud(std::istream& in) {
  std::vector<LabeledPoint> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 4) throw ParseError(lineno, "expected 'x y z label', got " + std::to_string(tok.size()) + " fields");
    LabeledPoint pt;
    double xyz[3];
    for (int i = 0; i < 3; ++i) {
      std::size_t used = 0;
      try {
        xyz[i] = std::stod(tok[static_cast<std::size_t>(i)], &used);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad coordinate '" + tok[static_cast<std::size_t>(i)] + "'");
      }
      if (used != tok[static_cast<std::size_t>(i)].size() || !std::isfinite(xyz[i]))
        throw ParseError(lineno, "bad coordinate '" + tok[static_cast<std::size_t>(i)] + "'");
    }
    pt.position = {xyz[0], xyz[1], xyz[2]};
    const std::string& l = tok[3];
    if (l.empty() || l.size() > 2 || !std::all_of(l.begin(), l.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ParseError(lineno, "bad label '" + l + "'");
    const int label = std::stoi(l);
    if (label >= kNumClasses) throw ParseError(lineno, "label " + l + " outside 0..6");
    pt.label = static_cast<std::uint8_t>(label);
    out.push_back(pt);
  }
  return out;
}

OccupancyGrid voxelize_point_cloud(std::span<const LabeledPoint> points, const GridSpec& spec) {
  spec.validate();
  std::unordered_map<std::size_t, std::array<std::uint32_t, kNumClasses>> votes;
  for (const auto& p : points) {
    if (p.label >= kNumClasses) throw ContractViolation("voxelize_point_cloud: label outside 0..6");
    const auto idx = world_to_voxel(p.position, spec);
    if (!idx) continue;
    ++votes[spec.linear(*idx)][p.label];
  }
  OccupancyGrid grid(spec);
  auto labels = grid.labels();
  for (const auto& [linear, counts] : votes) {
    // max_element returns the first maximum, i.e. the lowest class id on ties.
    labels[linear] = static_cast<std::uint8_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }
  return grid;
}

}  // namespace mcop
