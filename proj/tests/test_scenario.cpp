// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mcop/errors.hpp"
#include "mcop/scenario.hpp"
#include "scenario_fixture.hpp"

using namespace mcop;
using mcop::testing::small_config_json;

namespace {

std::vector<std::string> config_issues(const std::string& json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

std::string report_csv(const RunReport& r) {
  std::ostringstream os;
  write_report_csv(r, os);
  return os.str();
}

std::string log_csv(const RunReport& r) {
  std::ostringstream os;
  r.log.write_csv(os);
  return os.str();
}

}  // namespace

TEST_CASE("shipped configs load") {
  for (const char* name : {"reference.json", "occluded_uav_sweep.json"}) {
    const ScenarioConfig cfg = load_config(std::filesystem::path(MCOP_CONFIG_DIR) / name);
    CHECK(cfg.uavs.size() >= 4);
    CHECK(cfg.grid.nx == 128);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/x.json"), IoError);
}

TEST_CASE("config errors enumerate every issue") {
  const auto issues = config_issues(R"({
    "seed": 1,
    "grid": {"dims": [8, 8, 1], "voxel_size": -1},
    "camera": {"hfov_deg": 200, "rays_per_axis": 0},
    "uavs": [],
    "theta": 1.5,
    "budget": {"drop_probability": 2},
    "bogus": 3
  })");
  CHECK(issues.size() >= 6);
  auto mentions = [&](const std::string& needle) {
    for (const auto& s : issues)
      if (s.find(needle) != std::string::npos) return true;
    return false;
  };
  CHECK(mentions("bogus"));
  CHECK(mentions("theta"));
  CHECK(mentions("hfov"));
  CHECK(mentions("rays_per_axis"));
  CHECK(mentions("uavs"));
  CHECK(mentions("drop_probability"));

  CHECK_FALSE(config_issues("{ not json").empty());
  CHECK_FALSE(config_issues(small_config_json(2, R"(, "graph": {"edges": [[0, 0], [0, 5]]})")).empty());
  CHECK_FALSE(config_issues(small_config_json(2, R"(, "uavs": [{"position": [1, 1, -2]}])")).empty());
  CHECK(config_issues(small_config_json(2)).empty());
}

TEST_CASE("config echo round-trips") {
  const ScenarioConfig a = parse_config(small_config_json(3, R"(, "budget": {"bytes_per_round": 5000})"));
  const ScenarioConfig b = parse_config(config_to_json(a));
  CHECK(config_to_json(a) == config_to_json(b));
  CHECK(b.budget.bytes_per_round == std::optional<std::uint64_t>(5000));
}

TEST_CASE("a single UAV run equals its solo score") {
  const RunReport r = run_scenario(parse_config(small_config_json(1)));
  REQUIRE(r.ego_miou);
  CHECK(*r.ego_miou == *r.solo_ego_miou);
  CHECK(r.log_bytes == 0);
  CHECK(r.log.records.empty());
}

TEST_CASE("identical configs give identical outputs") {
  const ScenarioConfig cfg = parse_config(small_config_json(3, R"(, "budget": {"bytes_per_round": 20000})"));
  const RunReport a = run_scenario(cfg);
  const RunReport b = run_scenario(cfg, {Exec::Serial, nullptr});
  CHECK(report_csv(a) == report_csv(b));
  CHECK(log_csv(a) == log_csv(b));
  CHECK(a.log == b.log);
}

TEST_CASE("no communication reduces every UAV to solo") {
  const ScenarioConfig base = parse_config(small_config_json(3));
  const RunReport solo = run_scenario(with_axis_value(base, SweepAxis::kUavCount, 1));
  ScenarioConfig none = base;
  none.edges = std::vector<std::pair<int, int>>{};
  const RunReport a = run_scenario(none);
  const RunReport b = run_scenario(with_axis_value(base, SweepAxis::kBudget, 0));
  CHECK(a.per_uav[0].miou == solo.per_uav[0].miou);
  CHECK(b.per_uav[0].miou == solo.per_uav[0].miou);
  CHECK(a.per_uav[0].iou == solo.per_uav[0].iou);
  CHECK(b.per_uav[0].iou == solo.per_uav[0].iou);
  CHECK(b.log_bytes == 0);
  for (const auto& u : a.per_uav) CHECK(u.miou == u.solo_miou);
}

TEST_CASE("byte accounting paths agree") {
  const ScenarioConfig cfg = parse_config(small_config_json(4, R"(, "budget": {"bytes_per_round": 8000})"));
  RunTrace trace;
  const RunReport r = run_scenario(cfg, {Exec::Parallel, &trace});
  CHECK(r.ledger_bytes == r.log_bytes);
  CHECK(r.log_bytes == total_bytes(r.log));
  CHECK(r.request_bytes + r.feature_bytes == r.log_bytes);
  std::uint64_t egress = 0;
  for (const auto& u : r.per_uav) egress += u.egress_bytes;
  CHECK(egress == r.log_bytes);
  REQUIRE(trace.rounds.size() == cfg.rounds);
  for (const auto& round : trace.rounds)
    for (auto e : round.exchange.egress) CHECK(e <= 8000);
  CHECK(r.mb_per_round() == doctest::Approx(to_megabytes(r.log_bytes) / cfg.rounds));
}

TEST_CASE("report mIoU is the mean of its included classes") {
  const ScenarioConfig cfg = parse_config(small_config_json(2));
  for (bool free : {false, true}) {
    ScenarioConfig c = cfg;
    c.include_free = free;
    const RunReport r = run_scenario(c);
    for (const auto& u : r.per_uav) CHECK(*u.miou == doctest::Approx(miou(u.iou, free)));
    CHECK(*r.ego_miou == *r.per_uav[0].miou);
  }
}

TEST_CASE("axis overrides") {
  const ScenarioConfig base = parse_config(small_config_json(4));
  CHECK(with_axis_value(base, SweepAxis::kUavCount, 2).uavs.size() == 2);
  CHECK(with_axis_value(base, SweepAxis::kXi, 0.3).quality.xi == 0.3);
  CHECK_FALSE(with_axis_value(base, SweepAxis::kBudget, -1).budget.bytes_per_round);
  CHECK_FALSE(with_axis_value(base, SweepAxis::kBudget, std::numeric_limits<double>::infinity()).budget.bytes_per_round);
  CHECK(with_axis_value(base, SweepAxis::kBudget, 1234).budget.bytes_per_round == std::optional<std::uint64_t>(1234));
  CHECK_THROWS_AS(with_axis_value(base, SweepAxis::kTheta, 1.0), ConfigError);
  CHECK_THROWS_AS(with_axis_value(base, SweepAxis::kUavCount, 0), ConfigError);
  CHECK(parse_axis("uav_count") == SweepAxis::kUavCount);
  CHECK_THROWS_AS(parse_axis("speed"), ConfigError);
}

TEST_CASE("xi sweep bytes shrink and the csv is well formed") {
  const ScenarioConfig cfg = parse_config(small_config_json(3));
  const SweepTable t = sweep(cfg, SweepAxis::kXi, {0.6, 0.7, 0.8});
  REQUIRE(t.reports.size() == 3);
  REQUIRE(t.baseline);
  CHECK(t.baseline_name == "no_dmpg");
  for (std::size_t i = 1; i < 3; ++i) CHECK(t.reports[i].feature_bytes <= t.reports[i - 1].feature_bytes);
  std::ostringstream os;
  t.write_csv(os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("xi,ego_miou,", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("custom channel map runs end to end") {
  const auto dir = std::filesystem::temp_directory_path() / "mcop_psi_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "psi.txt");
    // Eight outputs: a permuted identity plus one summary row.
    f << "0 1 0 0 0 0 0 0\n1 0 0 0 0 0 0 0\n0 0 1 0 0 0 0 0\n0 0 0 1 0 0 0 0\n0 0 0 0 1 0 0 0\n"
         "0 0 0 0 0 1 0 0\n0 0 0 0 0 0 1 0\n1 1 1 1 1 1 1 0.5\n";
  }
  const ScenarioConfig plain = parse_config(small_config_json(2));
  const ScenarioConfig mapped = parse_config(small_config_json(2, R"(, "psi_file": "psi.txt")"), dir);
  const RunReport a = run_scenario(plain);
  const RunReport b = run_scenario(mapped);
  CHECK(*b.ego_miou == doctest::Approx(*a.ego_miou).epsilon(0.02));
  CHECK(b.feature_bytes >= a.feature_bytes);

  {
    std::ofstream f(dir / "lossy.txt");
    f << "1 1 1 1 1 1 1 0\n";
  }
  CHECK_THROWS_AS(parse_config(small_config_json(2, R"(, "psi_file": "lossy.txt")"), dir), ConfigError);
  std::filesystem::remove_all(dir);
}
