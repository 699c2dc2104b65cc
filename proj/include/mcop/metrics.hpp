// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "mcop/voxel_core.hpp"

namespace mcop {

/// IoU per class id; nullopt when the class is absent from both pred and gt.
using ClassIoU = std::array<std::optional<double>, kNumClasses>;

/// Per-class intersection / union counts; accumulates across frames.
struct ConfusionCounts {
  std::array<std::uint64_t, kNumClasses> intersection{};
  std::array<std::uint64_t, kNumClasses> union_{};

  /// `scope`, when given, restricts counting to its set voxels.
  void add(const OccupancyGrid& pred, const OccupancyGrid& gt, const Mask3D* scope = nullptr);
  ClassIoU iou() const;
};

ClassIoU iou_per_class(const OccupancyGrid& pred, const OccupancyGrid& gt, const Mask3D* scope = nullptr);

/// Mean over defined classes; free (id 0) only when include_free.
/// Throws UndefinedResult when no included class is defined.
double miou(const ClassIoU& per_class, bool include_free = false);
std::optional<double> try_miou(const ClassIoU& per_class, bool include_free = false);

struct AccuracyLoss {
  double ratio_percent;  // (baseline - variant) / baseline * 100
  double points;         // baseline - variant
};

/// Both in the caller's units (typically mIoU points). baseline <= 0 throws UndefinedResult.
AccuracyLoss accuracy_loss(double baseline, double variant);

}  // namespace mcop
