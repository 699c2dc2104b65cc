// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "mcop/exec.hpp"
#include "mcop/raycast.hpp"
#include "mcop/voxel_core.hpp"

namespace mcop {

struct EncoderParams {
  double logit_margin = 4.0;  // g
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  double edge_falloff = 0.0;  // attenuation 1 / (1 + falloff * tan(angle off axis))

  void validate() const;  // throws ConfigError
};

/// Local feature encoder contract: ground truth + visibility + viewpoint in,
/// FeatureVolume out. A learned encoder plugs in behind the same interface.
class LocalEncoder {
 public:
  virtual ~LocalEncoder() = default;
  virtual FeatureVolume encode(const OccupancyGrid& gt, const Mask3D& visible, const Pose& camera,
                               Exec exec = Exec::Parallel) const = 0;
};

/// Deterministic reference encoder.
///
/// Visible voxels get one-hot class logits (+g on the true class, -g elsewhere)
/// and an occupancy logit of +g (occupied) or -g (free), all scaled by the
/// edge attenuation, plus N(0, sigma) noise keyed by (seed, voxel, channel).
/// Invisible voxels are exactly zero in every channel.
class ReferenceEncoder final : public LocalEncoder {
 public:
  explicit ReferenceEncoder(EncoderParams params) : params_((params.validate(), params)) {}
  FeatureVolume encode(const OccupancyGrid& gt, const Mask3D& visible, const Pose& camera,
                       Exec exec = Exec::Parallel) const override;
  const EncoderParams& params() const { return params_; }

 private:
  EncoderParams params_;
};

inline FeatureVolume encode_local(const OccupancyGrid& gt, const Mask3D& visible, const Pose& camera,
                                  const EncoderParams& params, Exec exec = Exec::Parallel) {
  return ReferenceEncoder(params).encode(gt, visible, camera, exec);
}

/// 1 / (1 + falloff * tan(angle between camera axis and camera->point)).
double edge_attenuation(const Pose& camera, Vec3 point, double falloff);

}  // namespace mcop
