// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <tuple>

#include "mcop/aar_codec.hpp"
#include "mcop/errors.hpp"

namespace mcop {

void FusionParams::validate() const {
  std::vector<std::string> issues;
  if (!(g_expand > 0.0) || !std::isfinite(g_expand)) issues.emplace_back("fusion.g_expand must be > 0");
  if (!(ego_floor >= 0.0 && ego_floor <= 1.0)) issues.emplace_back("fusion.ego_floor must be in [0,1]");
  if (!psi.invertible()) issues.emplace_back("fusion: channel map has no left inverse");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

namespace {

struct Contribution {
  std::size_t voxel;
  std::uint16_t sender;
  std::array<float, kFeatureChannels> channels;
};

}  // namespace

FeatureVolume integrate(const FeatureVolume& ego, std::span<const ReceivedCells> received, const FusionParams& params,
                        Exec exec) {
  params.validate();
  const GridSpec& spec = ego.spec();
  if (ego.channels() != kFeatureChannels) throw ContractViolation("integrate: ego volume needs 8 channels");

  std::vector<Contribution> contribs;
  for (const auto& rc : received)
    for (const auto& cell : rc.cells) {
      if (cell.x >= spec.nx || cell.y >= spec.ny) throw ContractViolation("integrate: received cell outside ego grid");
      const PillarDecode d = decode_pillar(cell.altitude, cell.payload, spec.nz, params.psi);
      Contribution c{spec.linear(cell.x, cell.y, d.level), rc.sender, {}};
      c.channels[kOccupancyChannel] = static_cast<float>(params.g_expand);
      std::copy(d.class_logits.begin(), d.class_logits.end(), c.channels.begin() + 1);
      contribs.push_back(c);
    }
  std::stable_sort(contribs.begin(), contribs.end(), [](const Contribution& a, const Contribution& b) {
    return std::tie(a.voxel, a.sender) < std::tie(b.voxel, b.sender);
  });

  // Group boundaries: each group is one voxel.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < contribs.size(); ++i)
    if (i == 0 || contribs[i].voxel != contribs[i - 1].voxel) starts.push_back(i);
  starts.push_back(contribs.size());

  FeatureVolume out = ego;
  const double floor = params.ego_floor;
  auto weight = [floor](double occ_logit) { return std::max(floor, sigmoid(occ_logit)); };
  auto fuse_group = [&](std::size_t g) {
    const std::size_t voxel = contribs[starts[g]].voxel;
    const auto e = ego.voxel(voxel);
    const double we = weight(e[kOccupancyChannel]);
    std::array<double, kFeatureChannels> acc{};
    for (int k = 0; k < kFeatureChannels; ++k) acc[static_cast<std::size_t>(k)] = we * e[static_cast<std::size_t>(k)];
    double wsum = we;
    for (std::size_t i = starts[g]; i < starts[g + 1]; ++i) {
      const auto& ch = contribs[i].channels;
      const double w = weight(ch[kOccupancyChannel]);
      for (std::size_t k = 0; k < ch.size(); ++k) acc[k] += w * ch[k];
      wsum += w;
    }
    auto o = out.voxel(voxel);
    for (std::size_t k = 0; k < acc.size(); ++k) o[k] = static_cast<float>(acc[k] / wsum);
  };
  const auto groups = static_cast<std::int64_t>(starts.size()) - 1;
  if (exec == Exec::Serial) {
    for (std::int64_t g = 0; g < groups; ++g) fuse_group(static_cast<std::size_t>(g));
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t g = 0; g < groups; ++g) fuse_group(static_cast<std::size_t>(g));
  }
  return out;
}

}  // namespace mcop
