// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/voxel_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcop/errors.hpp"

namespace mcop {

std::string_view class_name(int class_id) {
  static constexpr std::array<std::string_view, kNumClasses> kNames = {
      "free", "others", "ground", "building", "vegetation", "vehicle", "urban_road"};
  if (class_id < 0 || class_id >= kNumClasses) return "invalid";
  return kNames[static_cast<std::size_t>(class_id)];
}

void GridSpec::validate() const {
  std::vector<std::string> issues;
  if (nx < 1 || ny < 1 || nz < 1) issues.emplace_back("grid dims must be >= 1");
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) issues.emplace_back("voxel_size must be > 0");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y) || !std::isfinite(origin.z))
    issues.emplace_back("grid origin must be finite");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

namespace {

std::optional<std::int64_t> axis_index(double p, double o, double s, std::int64_t n) {
  const double t = (p - o) / s;
  if (!std::isfinite(t)) return std::nullopt;
  double f = std::floor(t);
  const double r = std::nearbyint(t);
  if (std::abs(t - r) <= 1e-9 * std::max(1.0, std::abs(t))) f = r;
  if (f < 0.0 || f >= static_cast<double>(n)) return std::nullopt;
  return static_cast<std::int64_t>(f);
}

}  // namespace

std::optional<VoxelIndex> world_to_voxel(Vec3 p, const GridSpec& spec) {
  const auto ix = axis_index(p.x, spec.origin.x, spec.voxel_size, spec.nx);
  const auto iy = axis_index(p.y, spec.origin.y, spec.voxel_size, spec.ny);
  const auto iz = axis_index(p.z, spec.origin.z, spec.voxel_size, spec.nz);
  if (!ix || !iy || !iz) return std::nullopt;
  return VoxelIndex{*ix, *iy, *iz};
}

Vec3 voxel_center(VoxelIndex idx, const GridSpec& spec) {
  if (!spec.contains(idx)) throw ContractViolation("voxel_center: index out of range");
  const double s = spec.voxel_size;
  return {spec.origin.x + (static_cast<double>(idx.x) + 0.5) * s,
          spec.origin.y + (static_cast<double>(idx.y) + 0.5) * s,
          spec.origin.z + (static_cast<double>(idx.z) + 0.5) * s};
}

OccupancyGrid::OccupancyGrid(const GridSpec& spec, SemanticClass fill)
    : spec_((spec.validate(), spec)), labels_(spec.voxel_count(), static_cast<std::uint8_t>(fill)) {}

OccupancyGrid::OccupancyGrid(const GridSpec& spec, std::vector<std::uint8_t> labels)
    : spec_((spec.validate(), spec)), labels_(std::move(labels)) {
  if (labels_.size() != spec.voxel_count()) throw ContractViolation("label count does not match grid dims");
  for (auto l : labels_)
    if (l >= kNumClasses) throw ContractViolation("label outside 0..6");
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(), [](auto l) { return l != 0; }));
}

double OccupancyGrid::occupied_fraction() const {
  return labels_.empty() ? 0.0 : static_cast<double>(occupied_count()) / static_cast<double>(labels_.size());
}

FeatureVolume::FeatureVolume(const GridSpec& spec, int channels)
    : spec_((spec.validate(), spec)),
      channels_(channels >= 1 ? channels : throw ContractViolation("feature volume needs at least one channel")),
      data_(spec.voxel_count() * static_cast<std::size_t>(channels), 0.0f) {}

bool FeatureVolume::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::size_t Mask3D::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask3D Mask3D::operator|(const Mask3D& o) const {
  if (nx_ != o.nx_ || ny_ != o.ny_ || nz_ != o.nz_) throw ContractViolation("mask dims mismatch");
  Mask3D r = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] | o.bits_[i];
  return r;
}

std::size_t Mask2D::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask2D Mask2D::complement() const {
  Mask2D r = *this;
  for (auto& b : r.bits_) b = b ? 0 : 1;
  return r;
}

Mask2D Mask2D::operator&(const Mask2D& o) const {
  if (nx_ != o.nx_ || ny_ != o.ny_) throw ContractViolation("mask dims mismatch");
  Mask2D r = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] & o.bits_[i];
  return r;
}

Mask2D Mask2D::operator|(const Mask2D& o) const {
  if (nx_ != o.nx_ || ny_ != o.ny_) throw ContractViolation("mask dims mismatch");
  Mask2D r = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] | o.bits_[i];
  return r;
}

FeatureVolume one_hot_logits(const OccupancyGrid& grid, double margin, double occ_logit) {
  if (!(margin > 0.0)) throw ConfigError("one_hot_logits: margin must be > 0");
  FeatureVolume vol(grid.spec());
  const auto labels = grid.labels();
  const auto g = static_cast<float>(margin);
  const auto occ = static_cast<float>(occ_logit);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto v = vol.voxel(i);
    v[kOccupancyChannel] = labels[i] != 0 ? occ : -occ;
    for (int c = 0; c < kNumClasses; ++c) v[static_cast<std::size_t>(class_channel(c))] = (c == labels[i]) ? g : -g;
  }
  return vol;
}

int argmax_class(std::span<const float> v) {
  int best = 0;
  float best_val = v[1];
  for (int c = 1; c < kNumClasses; ++c) {
    const float val = v[static_cast<std::size_t>(class_channel(c))];
    if (val > best_val) {
      best_val = val;
      best = c;
    }
  }
  return best;
}

OccupancyGrid argmax_labels(const FeatureVolume& vol, Exec exec) {
  if (vol.channels() < kFeatureChannels) throw ContractViolation("argmax_labels: volume needs 8 channels");
  const GridSpec& spec = vol.spec();
  std::vector<std::uint8_t> labels(spec.voxel_count());
  const auto n = static_cast<std::int64_t>(labels.size());
  if (exec == Exec::Serial) {
    for (std::int64_t i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(argmax_class(vol.voxel(static_cast<std::size_t>(i))));
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(argmax_class(vol.voxel(static_cast<std::size_t>(i))));
  }
  return OccupancyGrid(spec, std::move(labels));
}

}  // namespace mcop
