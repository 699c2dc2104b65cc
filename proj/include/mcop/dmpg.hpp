// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

// Dual-mask perceptual guidance: per-cell quality scores, support/request
// masks, planar warping between agent BEV frames, and request-gated selection.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcop/aar_codec.hpp"
#include "mcop/geometry.hpp"
#include "mcop/voxel_core.hpp"

namespace mcop {

struct QualityParams {
  double alpha = 0.5;
  double beta = 0.5;
  double xi = 0.8;
  double epsilon_floor = 1e-6;  // epsilon = max(max |G|, floor)

  void validate() const;  // throws ConfigError
};

/// Norm over the BEV planes per cell, then central differences with edge
/// replication: |G| = sqrt(Gx^2 + Gy^2). Empty pillars have norm 0.
std::vector<double> gradient_map(const BevFeature& bev);

/// Score per cell: alpha * h / sqrt(h^2 + d^2) + beta * |G| / epsilon.
/// `uav` is expressed in the BEV grid frame; h is its height above the grid
/// origin plane and d the horizontal distance to each cell center.
/// h <= 0 -> ConfigError.
std::vector<double> quality_map(const BevFeature& bev, const Pose& uav, const QualityParams& qp);

/// Cells whose score is strictly greater than xi.
Mask2D support_mask(std::span<const double> quality, const GridSpec& spec, double xi);
Mask2D support_mask(const BevFeature& bev, const Pose& uav, const QualityParams& qp);

inline Mask2D request_mask(const Mask2D& sup) { return sup.complement(); }

/// For every ego cell, the nearest source cell (or -1 when it falls outside the
/// source grid). Frames are reduced to yaw plus horizontal translation.
class PlanarWarp {
 public:
  PlanarWarp(const GridSpec& src_spec, const Pose& src_frame, const Pose& ego_frame, const GridSpec& ego_spec);

  std::int64_t source(std::size_t ego_cell) const { return map_[ego_cell]; }
  const GridSpec& ego_spec() const { return ego_spec_; }
  bool is_identity() const { return identity_; }

  Mask2D apply(const Mask2D& src) const;
  BevFeature apply(const BevFeature& src) const;
  std::vector<double> apply(std::span<const double> src, double fill) const;

 private:
  GridSpec ego_spec_;
  std::vector<std::int64_t> map_;
  bool identity_ = true;
};

inline BevFeature warp_to_ego(const BevFeature& src, const Pose& src_frame, const Pose& ego_frame,
                              const GridSpec& ego_spec) {
  return PlanarWarp(src.spec, src_frame, ego_frame, ego_spec).apply(src);
}
inline Mask2D warp_to_ego(const Mask2D& src, const GridSpec& src_spec, const Pose& src_frame, const Pose& ego_frame,
                          const GridSpec& ego_spec) {
  return PlanarWarp(src_spec, src_frame, ego_frame, ego_spec).apply(src);
}

struct SparseCell {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  float altitude = 0.0f;
  std::vector<float> payload;
  friend bool operator==(const SparseCell&, const SparseCell&) = default;
};

/// Cells sorted by (x, y), unique.
using SparseCellSet = std::vector<SparseCell>;

bool is_sorted_unique(const SparseCellSet& cells);

/// What a neighbor offers: its BEV, support mask, quality scores and frame.
struct NeighborOffer {
  const BevFeature& bev;
  const Mask2D& support;
  std::span<const double> quality;
  const Pose& frame;
};

struct Selection {
  SparseCellSet cells;
  std::vector<double> quality;  // neighbor's score per selected cell
};

/// Ego cells where ego_req and the warped support mask are both set and the
/// warped pillar is non-empty; payload is the warped planes.
Selection select_transmit(const NeighborOffer& nbr, const Mask2D& ego_req, const Pose& ego_frame,
                          const GridSpec& ego_spec);

}  // namespace mcop
