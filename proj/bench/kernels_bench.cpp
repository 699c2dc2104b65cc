// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "mcop/aar_codec.hpp"
#include "mcop/encoder.hpp"
#include "mcop/fusion.hpp"
#include "mcop/raycast.hpp"
#include "mcop/scene.hpp"

using namespace mcop;

namespace {

struct Fixture {
  GridSpec spec{128, 128, 32, 1.0, {}};
  OccupancyGrid gt;
  CameraModel cam;
  Mask3D visible;
  FeatureVolume volume;
  BevFeature bev;
  std::vector<ReceivedCells> inbox;

  Fixture() : gt(generate_scene(spec, SceneParams{})) {
    cam.pose = Pose::nadir_camera({64, 64, 60}, 0.0, 0.0);
    cam.rays_per_axis = 256;
    visible = raycast_visibility(gt, cam);
    EncoderParams ep;
    ep.noise_sigma = 0.5;
    ep.noise_seed = 1;
    volume = encode_local(gt, visible, cam.pose, ep);
    bev = compress(volume, 0.5);
    ReceivedCells rc;
    rc.sender = 1;
    for (std::int64_t x = 0; x < spec.nx; x += 2)
      for (std::int64_t y = 0; y < spec.ny; ++y) {
        const auto c = spec.cell(x, y);
        if (bev.empty(c)) continue;
        const auto p = bev.cell_planes(c);
        rc.cells.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), bev.altitude[c], {p.begin(), p.end()}});
      }
    inbox.push_back(std::move(rc));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

Exec mode(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_Raycast(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(raycast_visibility(f.gt, f.cam, mode(s)));
}

void BM_Encode(benchmark::State& s) {
  const auto& f = fixture();
  EncoderParams ep;
  ep.noise_sigma = 0.5;
  ep.edge_falloff = 0.3;
  for (auto _ : s) benchmark::DoNotOptimize(encode_local(f.gt, f.visible, f.cam.pose, ep, mode(s)));
}

void BM_Compress(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(compress(f.volume, 0.5, mode(s)));
}

void BM_Expand(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(expand(f.bev, 4.0, mode(s)));
}

void BM_Argmax(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(argmax_labels(f.volume, mode(s)));
}

void BM_Integrate(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(integrate(f.volume, f.inbox, FusionParams{}, mode(s)));
}

}  // namespace

BENCHMARK(BM_Raycast)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Encode)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Compress)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Expand)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Argmax)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Integrate)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
