// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/encoder.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mcop/errors.hpp"
#include "mcop/rng.hpp"

namespace mcop {

void EncoderParams::validate() const {
  std::vector<std::string> issues;
  if (!(logit_margin > 0.0) || !std::isfinite(logit_margin)) issues.emplace_back("encoder.logit_margin must be > 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) issues.emplace_back("encoder.noise_sigma must be >= 0");
  if (!(edge_falloff >= 0.0) || !std::isfinite(edge_falloff)) issues.emplace_back("encoder.edge_falloff must be >= 0");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

double edge_attenuation(const Pose& camera, Vec3 point, double falloff) {
  if (falloff == 0.0) return 1.0;
  const Vec3 axis = camera.rotation * Vec3{0, 0, 1};
  const Vec3 ray = point - camera.translation;
  const double along = dot(ray, axis);
  const double across = norm(ray - axis * along);
  if (across == 0.0) return 1.0;
  // Points at or behind the image plane get the 89.9 degree cap.
  constexpr double kMaxTan = 572.9572133542;
  const double tan_angle = along > 0.0 ? std::min(across / along, kMaxTan) : kMaxTan;
  return 1.0 / (1.0 + falloff * tan_angle);
}

namespace {

void encode_voxel(const OccupancyGrid& gt, const Mask3D& vis, const Pose& cam, const EncoderParams& p,
                  std::size_t i, FeatureVolume& out) {
  if (!vis.test(i)) return;  // unobserved voxels stay exactly zero
  const GridSpec& spec = gt.spec();
  const int label = gt.labels()[i];
  const double att = edge_attenuation(cam, voxel_center(spec.unlinear(i), spec), p.edge_falloff);
  const double g = p.logit_margin * att;
  auto v = out.voxel(i);
  auto noisy = [&](double value, int channel) {
    if (p.noise_sigma > 0.0) value += p.noise_sigma * counter_normal(p.noise_seed, i, static_cast<std::uint64_t>(channel));
    return static_cast<float>(value);
  };
  v[kOccupancyChannel] = noisy(label != 0 ? g : -g, kOccupancyChannel);
  for (int c = 0; c < kNumClasses; ++c) {
    const int ch = class_channel(c);
    v[static_cast<std::size_t>(ch)] = noisy(c == label ? g : 0.0, ch);
  }
}

}  // namespace

FeatureVolume ReferenceEncoder::encode(const OccupancyGrid& gt, const Mask3D& visible, const Pose& camera,
                                       Exec exec) const {
  if (!visible.dims_match(gt.spec())) throw ContractViolation("encode_local: visibility dims differ from ground truth");
  FeatureVolume out(gt.spec());
  const auto n = static_cast<std::int64_t>(gt.spec().voxel_count());
  if (exec == Exec::Serial) {
    for (std::int64_t i = 0; i < n; ++i) encode_voxel(gt, visible, camera, params_, static_cast<std::size_t>(i), out);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) encode_voxel(gt, visible, camera, params_, static_cast<std::size_t>(i), out);
  }
  return out;
}

}  // namespace mcop
