// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "mcop/aar_codec.hpp"
#include "mcop/exec.hpp"
#include "mcop/swarm.hpp"
#include "mcop/voxel_core.hpp"

namespace mcop {

struct FusionParams {
  double g_expand = 4.0;   // occupancy logit given to decoded cells
  double ego_floor = 0.1;  // minimum weight of any source
  ChannelMap psi;          // map the senders compressed with

  void validate() const;  // throws ConfigError
};

/// Confidence-weighted merge of received BEV cells into the ego volume.
///
/// Each received cell decodes to one voxel (class logits = planes * Z at the
/// decoded altitude level, occupancy logit g_expand). Per touched voxel every
/// channel becomes (w_e * ego + sum_j w_j * recv_j) / (w_e + sum_j w_j) with
/// w = max(ego_floor, sigmoid(occupancy logit)). Untouched voxels are copied
/// bit-for-bit. Contributions are summed in sender-id order, so the result does
/// not depend on the order of `received`.
FeatureVolume integrate(const FeatureVolume& ego, std::span<const ReceivedCells> received, const FusionParams& params,
                        Exec exec = Exec::Parallel);

inline OccupancyGrid predict(const FeatureVolume& fused, Exec exec = Exec::Parallel) { return argmax_labels(fused, exec); }

}  // namespace mcop
