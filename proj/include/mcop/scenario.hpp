// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

// Scenario configuration, the end-to-end run loop, sweeps and report output.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mcop/aar_codec.hpp"
#include "mcop/dmpg.hpp"
#include "mcop/encoder.hpp"
#include "mcop/exec.hpp"
#include "mcop/fusion.hpp"
#include "mcop/metrics.hpp"
#include "mcop/raycast.hpp"
#include "mcop/scene.hpp"
#include "mcop/swarm.hpp"

namespace mcop {

struct UavSpec {
  Vec3 position;
  double yaw = 0.0;   // radians
  double tilt = 0.0;  // radians off nadir, about the camera x axis
  Vec3 velocity;      // meters per round
  std::vector<Vec3> trajectory;  // explicit per-round positions; overrides position/velocity

  Pose camera_pose(std::uint32_t round) const;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  GridSpec grid;
  SceneParams scene;
  double hfov = 1.0471975512;
  double vfov = 1.0471975512;
  int rays_per_axis = 128;
  std::vector<UavSpec> uavs;
  std::uint32_t rounds = 1;
  std::optional<std::vector<std::pair<int, int>>> edges;  // nullopt = fully connected
  EncoderParams encoder;
  bool noise_seed_from_seed = true;  // derive encoder.noise_seed from seed
  double theta = 0.5;
  QualityParams quality;
  bool dmpg = true;  // false: every nonempty cell is offered and requested
  LinkBudget budget;
  FusionParams fusion;
  bool include_free = false;
  int threads = 0;
  std::optional<std::filesystem::path> psi_file;
  std::filesystem::path out_dir = "out";

  /// Throws ConfigError listing every violated field.
  void validate() const;
  CommGraph graph() const;
  SceneParams effective_scene() const;
  std::uint64_t noise_seed() const;
};

/// JSON scenario file; see configs/ for the schema by example.
/// Throws ConfigError for schema or value errors and IoError when unreadable.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = ".");
/// Canonical JSON echo of a config (stable key order).
std::string config_to_json(const ScenarioConfig& cfg);

struct UavMetrics {
  ClassIoU iou;
  std::optional<double> miou;
  ClassIoU solo_iou;
  std::optional<double> solo_miou;
  std::uint64_t egress_bytes = 0;
};

struct RunReport {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t uav_count = 0;
  std::uint32_t rounds = 0;
  bool include_free = false;

  std::vector<UavMetrics> per_uav;
  ClassIoU mean_iou;  // per class, averaged over UAVs that define it
  std::optional<double> ego_miou;       // UAV 0, collaborative
  std::optional<double> solo_ego_miou;  // UAV 0, own features only
  std::optional<double> mean_miou;      // over UAVs

  std::uint64_t ledger_bytes = 0;  // summed from the budget ledger
  std::uint64_t log_bytes = 0;     // summed from the delivery log
  std::uint64_t request_bytes = 0;
  std::uint64_t feature_bytes = 0;
  std::uint64_t feature_messages = 0;
  std::uint64_t delivered_cells = 0;
  std::uint64_t truncated_cells = 0;
  double occupied_fraction = 0.0;

  std::string config_echo;
  double wall_clock_seconds = 0.0;
  DeliveryLog log;

  double mb_per_round() const { return rounds ? to_megabytes(log_bytes) / rounds : 0.0; }
  double feature_mb_per_round() const { return rounds ? to_megabytes(feature_bytes) / rounds : 0.0; }
  double mb_per_transmission() const {
    return feature_messages ? to_megabytes(feature_bytes) / static_cast<double>(feature_messages) : 0.0;
  }
};

/// Intermediate state kept on request, for diagnostics and tests.
struct AgentTrace {
  Pose camera;
  Mask3D visible;
  FeatureVolume volume;
  AgentState state;
  FeatureVolume fused;
  OccupancyGrid prediction;
};

struct RoundTrace {
  std::vector<AgentTrace> agents;
  RoundResult exchange;
};

struct RunTrace {
  OccupancyGrid ground_truth;
  std::vector<RoundTrace> rounds;
};

struct RunOptions {
  Exec exec = Exec::Parallel;
  RunTrace* trace = nullptr;
};

/// scene -> visibility -> encode -> compress -> masks -> exchange -> fuse -> metrics.
/// Deterministic given the config.
RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

enum class SweepAxis { kUavCount, kXi, kBudget, kTheta };
SweepAxis parse_axis(const std::string& s);  // ConfigError on unknown names
const char* to_string(SweepAxis a);

/// Budget values < 0 or infinite mean unlimited.
ScenarioConfig with_axis_value(ScenarioConfig cfg, SweepAxis axis, double value);

struct SweepTable {
  SweepAxis axis;
  std::vector<double> values;
  std::vector<RunReport> reports;
  /// Accuracy-loss reference: a run with DMPG disabled for xi sweeps, the first
  /// row otherwise.
  std::optional<RunReport> baseline;
  std::string baseline_name;

  void write_csv(std::ostream& out) const;
};

SweepTable sweep(const ScenarioConfig& cfg, SweepAxis axis, const std::vector<double>& values, const RunOptions& opts = {});

/// Per-UAV rows plus a "mean" row; wall-clock excluded so identical configs
/// give identical files.
void write_report_csv(const RunReport& r, std::ostream& out);
/// Human-readable summary, including wall-clock.
void write_summary(const RunReport& r, std::ostream& out);

}  // namespace mcop
