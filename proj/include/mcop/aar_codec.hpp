// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

// Altitude-aware reduction: FeatureVolume (X*Y*Z*8) -> BEV planes (X*Y*C_out)
// plus one normalised altitude per pillar, and the analytic expansion back.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <span>
#include <vector>

#include "mcop/exec.hpp"
#include "mcop/voxel_core.hpp"

namespace mcop {

inline constexpr float kEmptyPillar = -1.0f;
inline constexpr int kDefaultBevChannels = kNumClasses;

/// Linear map from the 8 concatenated per-pillar values (7 class means, then
/// altitude) to C_out output planes. The default routes the class means through
/// unchanged and keeps altitude in its own field.
class ChannelMap {
 public:
  ChannelMap() = default;  // identity
  static ChannelMap identity();
  /// Text: C_out rows of 8 whitespace-separated floats, '#' comments.
  static ChannelMap parse(std::istream& in);
  ChannelMap(int rows, std::vector<double> coeffs);

  int out_channels() const { return rows_; }
  bool is_identity() const { return identity_; }
  void apply(std::span<const double, kNumClasses> means, double altitude, std::span<float> out) const;

  /// True when the class-mean block has full column rank, so means can be
  /// recovered from the planes.
  bool invertible() const { return identity_ || !left_inverse_.empty(); }
  /// Least-squares class means from output planes; ContractViolation when not invertible.
  std::array<double, kNumClasses> recover_means(std::span<const float> planes, double altitude) const;

 private:
  int rows_ = kDefaultBevChannels;
  std::vector<double> coeffs_;
  void build_left_inverse();
  std::vector<double> left_inverse_;  // 7 x rows
  bool identity_ = true;
};

struct BevFeature {
  GridSpec spec;  // nz kept for expansion
  double theta = 0.5;
  int channels = kDefaultBevChannels;
  std::vector<float> altitude;  // nx*ny, values in {-1} U [0,1]
  std::vector<float> planes;    // nx*ny*channels, cell-major

  BevFeature() = default;
  BevFeature(const GridSpec& s, int c_out, double theta_used);

  bool empty(std::size_t cell) const { return altitude[cell] == kEmptyPillar; }
  std::span<const float> cell_planes(std::size_t cell) const {
    return std::span<const float>(planes).subspan(cell * static_cast<std::size_t>(channels), static_cast<std::size_t>(channels));
  }
  std::span<float> cell_planes(std::size_t cell) {
    return std::span<float>(planes).subspan(cell * static_cast<std::size_t>(channels), static_cast<std::size_t>(channels));
  }
  std::size_t nonempty_count() const;

  friend bool operator==(const BevFeature&, const BevFeature&) = default;
};

/// sigmoid(occupancy logit) > theta, strictly. theta outside (0,1) -> ConfigError.
Mask3D valid_mask(const FeatureVolume& vol, double theta, Exec exec = Exec::Parallel);

/// Per pillar: mean valid z over (Z-1), clamped to [0,1]; -1 for empty pillars;
/// 0 for non-empty pillars when Z = 1. Row-major over (x, y).
std::vector<float> altitude_encode(const Mask3D& mask);

/// Masked class-logit sums divided by Z (not by the valid count), altitude
/// encoded per pillar, then routed through `psi`.
BevFeature compress(const FeatureVolume& vol, double theta, const ChannelMap& psi, Exec exec = Exec::Parallel);
inline BevFeature compress(const FeatureVolume& vol, double theta, Exec exec = Exec::Parallel) {
  return compress(vol, theta, ChannelMap::identity(), exec);
}

/// round(altitude * (Z-1)) with ties to even. The product is snapped onto a
/// half-integer when float storage of the altitude put it within rounding error.
std::int64_t decode_level(float altitude, std::int64_t nz);

/// One pillar's contribution: class logits planes * Z at the decoded level.
struct PillarDecode {
  std::int64_t level;
  std::array<float, kNumClasses> class_logits;
};
PillarDecode decode_pillar(float altitude, std::span<const float> planes, std::int64_t nz,
                          const ChannelMap& psi = ChannelMap::identity());

/// Empty pillars stay zero; otherwise the decoded level gets the class logits
/// and occupancy logit g_expand. `psi` must be the map used to compress.
FeatureVolume expand(const BevFeature& bev, const ChannelMap& psi, double g_expand = 4.0, Exec exec = Exec::Parallel);
inline FeatureVolume expand(const BevFeature& bev, double g_expand = 4.0, Exec exec = Exec::Parallel) {
  return expand(bev, ChannelMap::identity(), g_expand, exec);
}

/// Raw float bytes of the uncompressed volume (headers excluded).
std::uint64_t volume_bytes(const GridSpec& spec, int channels);
/// Raw float bytes of the BEV planes plus the altitude plane.
std::uint64_t bev_bytes(const GridSpec& spec, int c_out);
inline double compression_ratio(const GridSpec& spec, int channels, int c_out) {
  return static_cast<double>(volume_bytes(spec, channels)) / static_cast<double>(bev_bytes(spec, c_out));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace mcop
