// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/metrics.hpp"

#include <cmath>

#include "mcop/errors.hpp"

namespace mcop {

void ConfusionCounts::add(const OccupancyGrid& pred, const OccupancyGrid& gt, const Mask3D* scope) {
  if (pred.spec().nx != gt.spec().nx || pred.spec().ny != gt.spec().ny || pred.spec().nz != gt.spec().nz)
    throw ContractViolation("iou: prediction and ground truth dims differ");
  if (scope && !scope->dims_match(gt.spec())) throw ContractViolation("iou: scope mask dims differ");
  const auto p = pred.labels();
  const auto g = gt.labels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (scope && !scope->test(i)) continue;
    if (p[i] == g[i]) {
      ++intersection[p[i]];
      ++union_[p[i]];
    } else {
      ++union_[p[i]];
      ++union_[g[i]];
    }
  }
}

ClassIoU ConfusionCounts::iou() const {
  ClassIoU out;
  for (std::size_t c = 0; c < out.size(); ++c)
    if (union_[c] > 0) out[c] = static_cast<double>(intersection[c]) / static_cast<double>(union_[c]);
  return out;
}

ClassIoU iou_per_class(const OccupancyGrid& pred, const OccupancyGrid& gt, const Mask3D* scope) {
  ConfusionCounts cc;
  cc.add(pred, gt, scope);
  return cc.iou();
}

std::optional<double> try_miou(const ClassIoU& per_class, bool include_free) {
  double sum = 0.0;
  int n = 0;
  for (int c = include_free ? 0 : 1; c < kNumClasses; ++c) {
    if (!per_class[static_cast<std::size_t>(c)]) continue;
    sum += *per_class[static_cast<std::size_t>(c)];
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

double miou(const ClassIoU& per_class, bool include_free) {
  const auto m = try_miou(per_class, include_free);
  if (!m) throw UndefinedResult("mIoU undefined: no included class is present");
  return *m;
}

AccuracyLoss accuracy_loss(double baseline, double variant) {
  if (!(baseline > 0.0) || !std::isfinite(baseline)) throw UndefinedResult("accuracy loss needs a positive baseline");
  return {(baseline - variant) / baseline * 100.0, baseline - variant};
}

}  // namespace mcop
