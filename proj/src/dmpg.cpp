// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/dmpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcop/errors.hpp"

namespace mcop {

void QualityParams::validate() const {
  std::vector<std::string> issues;
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) issues.emplace_back("quality.alpha must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) issues.emplace_back("quality.beta must be >= 0");
  if (!(xi >= 0.0 && xi <= 1.0)) issues.emplace_back("quality.xi must be in [0,1]");
  if (!(epsilon_floor > 0.0) || !std::isfinite(epsilon_floor)) issues.emplace_back("quality.epsilon_floor must be > 0");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::vector<double> gradient_map(const BevFeature& bev) {
  const std::int64_t nx = bev.spec.nx, ny = bev.spec.ny;
  std::vector<double> n(bev.spec.cell_count(), 0.0);
  for (std::size_t c = 0; c < n.size(); ++c) {
    if (bev.empty(c)) continue;
    double s = 0.0;
    for (float v : bev.cell_planes(c)) s += static_cast<double>(v) * static_cast<double>(v);
    n[c] = std::sqrt(s);
  }
  std::vector<double> g(n.size(), 0.0);
  auto at = [&](std::int64_t x, std::int64_t y) {
    return n[static_cast<std::size_t>(std::clamp<std::int64_t>(x, 0, nx - 1) * ny + std::clamp<std::int64_t>(y, 0, ny - 1))];
  };
  for (std::int64_t x = 0; x < nx; ++x)
    for (std::int64_t y = 0; y < ny; ++y) {
      const double gx = (at(x + 1, y) - at(x - 1, y)) / 2.0;
      const double gy = (at(x, y + 1) - at(x, y - 1)) / 2.0;
      g[static_cast<std::size_t>(x * ny + y)] = std::sqrt(gx * gx + gy * gy);
    }
  return g;
}

std::vector<double> quality_map(const BevFeature& bev, const Pose& uav, const QualityParams& qp) {
  qp.validate();
  const GridSpec& s = bev.spec;
  const double h = uav.translation.z - s.origin.z;
  if (!(h > 0.0)) throw ConfigError("quality score needs the UAV above the ground plane (h > 0)");
  const std::vector<double> grad = gradient_map(bev);
  const double eps = std::max(qp.epsilon_floor, *std::max_element(grad.begin(), grad.end()));
  std::vector<double> q(grad.size());
  for (std::int64_t x = 0; x < s.nx; ++x)
    for (std::int64_t y = 0; y < s.ny; ++y) {
      const double cx = s.origin.x + (static_cast<double>(x) + 0.5) * s.voxel_size;
      const double cy = s.origin.y + (static_cast<double>(y) + 0.5) * s.voxel_size;
      const double d = std::hypot(cx - uav.translation.x, cy - uav.translation.y);
      const std::size_t c = s.cell(x, y);
      q[c] = qp.alpha * h / std::sqrt(h * h + d * d) + qp.beta * grad[c] / eps;
    }
  return q;
}

Mask2D support_mask(std::span<const double> quality, const GridSpec& spec, double xi) {
  if (quality.size() != spec.cell_count()) throw ContractViolation("support_mask: quality map size mismatch");
  Mask2D m(spec.nx, spec.ny);
  for (std::size_t c = 0; c < quality.size(); ++c) m.set(c, quality[c] > xi);
  return m;
}

Mask2D support_mask(const BevFeature& bev, const Pose& uav, const QualityParams& qp) {
  return support_mask(quality_map(bev, uav, qp), bev.spec, qp.xi);
}

PlanarWarp::PlanarWarp(const GridSpec& src, const Pose& src_frame, const Pose& ego_frame, const GridSpec& ego)
    : ego_spec_(ego), map_(ego.cell_count(), -1) {
  const double ye = ego_frame.yaw(), ys = src_frame.yaw();
  const double ce = std::cos(ye), se = std::sin(ye), cs = std::cos(ys), ss = std::sin(ys);
  for (std::int64_t x = 0; x < ego.nx; ++x)
    for (std::int64_t y = 0; y < ego.ny; ++y) {
      const double px = ego.origin.x + (static_cast<double>(x) + 0.5) * ego.voxel_size;
      const double py = ego.origin.y + (static_cast<double>(y) + 0.5) * ego.voxel_size;
      // ego frame -> world -> source frame
      const double wx = ce * px - se * py + ego_frame.translation.x;
      const double wy = se * px + ce * py + ego_frame.translation.y;
      const double dx = wx - src_frame.translation.x, dy = wy - src_frame.translation.y;
      const double qx = cs * dx + ss * dy, qy = -ss * dx + cs * dy;
      const double fx = std::floor((qx - src.origin.x) / src.voxel_size);
      const double fy = std::floor((qy - src.origin.y) / src.voxel_size);
      const std::size_t e = ego.cell(x, y);
      if (fx < 0 || fy < 0 || fx >= static_cast<double>(src.nx) || fy >= static_cast<double>(src.ny)) {
        identity_ = false;
        continue;
      }
      map_[e] = static_cast<std::int64_t>(fx) * src.ny + static_cast<std::int64_t>(fy);
      if (map_[e] != static_cast<std::int64_t>(e)) identity_ = false;
    }
  if (src.cell_count() != ego.cell_count()) identity_ = false;
}

Mask2D PlanarWarp::apply(const Mask2D& src) const {
  Mask2D out(ego_spec_.nx, ego_spec_.ny);
  for (std::size_t e = 0; e < map_.size(); ++e)
    if (map_[e] >= 0) out.set(e, src.test(static_cast<std::size_t>(map_[e])));
  return out;
}

BevFeature PlanarWarp::apply(const BevFeature& src) const {
  GridSpec spec = ego_spec_;
  spec.nz = src.spec.nz;
  BevFeature out(spec, src.channels, src.theta);
  for (std::size_t e = 0; e < map_.size(); ++e) {
    if (map_[e] < 0) continue;
    const auto s = static_cast<std::size_t>(map_[e]);
    out.altitude[e] = src.altitude[s];
    std::copy_n(src.cell_planes(s).begin(), src.channels, out.cell_planes(e).begin());
  }
  return out;
}

std::vector<double> PlanarWarp::apply(std::span<const double> src, double fill) const {
  std::vector<double> out(map_.size(), fill);
  for (std::size_t e = 0; e < map_.size(); ++e)
    if (map_[e] >= 0) out[e] = src[static_cast<std::size_t>(map_[e])];
  return out;
}

bool is_sorted_unique(const SparseCellSet& cells) {
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto& a = cells[i - 1];
    const auto& b = cells[i];
    if (!(a.x < b.x || (a.x == b.x && a.y < b.y))) return false;
  }
  return true;
}

Selection select_transmit(const NeighborOffer& nbr, const Mask2D& ego_req, const Pose& ego_frame,
                          const GridSpec& ego_spec) {
  if (ego_req.nx() != ego_spec.nx || ego_req.ny() != ego_spec.ny)
    throw ContractViolation("select_transmit: request mask does not match ego grid");
  if (ego_spec.nx > 65536 || ego_spec.ny > 65536) throw ContractViolation("select_transmit: grid too wide for 16-bit cells");
  if (nbr.quality.size() != nbr.bev.spec.cell_count() || nbr.support.size() != nbr.bev.spec.cell_count())
    throw ContractViolation("select_transmit: neighbor maps do not match its grid");
  const PlanarWarp warp(nbr.bev.spec, nbr.frame, ego_frame, ego_spec);
  Selection sel;
  const auto ch = static_cast<std::size_t>(nbr.bev.channels);
  for (std::int64_t x = 0; x < ego_spec.nx; ++x)
    for (std::int64_t y = 0; y < ego_spec.ny; ++y) {
      const std::size_t e = ego_spec.cell(x, y);
      if (!ego_req.test(e)) continue;
      const std::int64_t s = warp.source(e);
      if (s < 0) continue;
      const auto su = static_cast<std::size_t>(s);
      if (!nbr.support.test(su) || nbr.bev.empty(su)) continue;
      SparseCell cell;
      cell.x = static_cast<std::uint16_t>(x);
      cell.y = static_cast<std::uint16_t>(y);
      cell.altitude = nbr.bev.altitude[su];
      const auto planes = nbr.bev.cell_planes(su);
      cell.payload.assign(planes.begin(), planes.begin() + static_cast<std::ptrdiff_t>(ch));
      sel.cells.push_back(std::move(cell));
      sel.quality.push_back(nbr.quality[su]);
    }
  return sel;
}

}  // namespace mcop
