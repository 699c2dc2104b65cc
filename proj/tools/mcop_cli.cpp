// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

// mcop: scene generation, scenario runs, sweeps and offline evaluation.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mcop/bytes.hpp"
#include "mcop/container.hpp"
#include "mcop/errors.hpp"
#include "mcop/metrics.hpp"
#include "mcop/scenario.hpp"
#include "mcop/scene.hpp"

namespace fs = std::filesystem;
using namespace mcop;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> xi;
  std::string budget;
  std::optional<int> uavs;
  bool include_free = false;
  int threads = 0;
  bool serial = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Scenario JSON")->required();
  cmd->add_option("--seed", o.seed, "Override the scenario seed");
  cmd->add_option("--out", o.out, "Output directory (default: the config's output.dir)");
  cmd->add_option("--xi", o.xi, "Override the quality threshold");
  cmd->add_option("--budget", o.budget, "Per-UAV bytes per round; 'inf' for unlimited");
  cmd->add_option("--uavs", o.uavs, "Use only the first N UAVs");
  cmd->add_flag("--include-free", o.include_free, "Include the free class in mIoU");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = OpenMP default)");
  cmd->add_flag("--serial", o.serial, "Use the serial reference kernels");
}

double parse_budget(const std::string& s) {
  if (s == "inf" || s == "unlimited") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size()) throw ConfigError("--budget: expected a byte count or 'inf', got '" + s + "'");
  return v;
}

ScenarioConfig load_with_overrides(const Overrides& o) {
  ScenarioConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.xi) cfg = with_axis_value(std::move(cfg), SweepAxis::kXi, *o.xi);
  if (!o.budget.empty()) cfg = with_axis_value(std::move(cfg), SweepAxis::kBudget, parse_budget(o.budget));
  if (o.uavs) cfg = with_axis_value(std::move(cfg), SweepAxis::kUavCount, *o.uavs);
  if (o.include_free) cfg.include_free = true;
  if (o.threads > 0) cfg.threads = o.threads;
  cfg.validate();
  return cfg;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write " + p.string());
  return f;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_budget(item));
  if (out.empty()) throw ConfigError("--values: expected a comma-separated list");
  return out;
}

int cmd_gen(const Overrides& o, const std::string& points) {
  ScenarioConfig cfg = load_with_overrides(o);
  ensure_dir(cfg.out_dir);
  OccupancyGrid grid = [&] {
    if (points.empty()) return generate_scene(cfg.grid, cfg.effective_scene());
    std::ifstream in(points);
    if (!in) throw IoError("cannot open " + points);
    const auto pts = parse_point_cloud(in);
    return voxelize_point_cloud(pts, cfg.grid);
  }();
  const fs::path path = cfg.out_dir / "scene.mcopvox";
  write_grid(path, grid);
  std::cout << "wrote " << path.string() << " (" << grid.spec().nx << 'x' << grid.spec().ny << 'x' << grid.spec().nz
            << ", occupied " << std::fixed << std::setprecision(2) << grid.occupied_fraction() * 100.0 << "%)\n";
  return 0;
}

int cmd_run(const Overrides& o) {
  const ScenarioConfig cfg = load_with_overrides(o);
  RunOptions opts;
  opts.exec = o.serial ? Exec::Serial : Exec::Parallel;
  const RunReport rep = run_scenario(cfg, opts);
  ensure_dir(cfg.out_dir);
  {
    auto f = open_out(cfg.out_dir / "report.csv");
    write_report_csv(rep, f);
  }
  {
    auto f = open_out(cfg.out_dir / "delivery_log.csv");
    rep.log.write_csv(f);
  }
  {
    auto f = open_out(cfg.out_dir / "config.json");
    f << rep.config_echo << '\n';
  }
  {
    auto f = open_out(cfg.out_dir / "summary.txt");
    write_summary(rep, f);
  }
  write_summary(rep, std::cout);
  return 0;
}

int cmd_sweep(const Overrides& o, const std::string& axis_name, const std::string& values) {
  const ScenarioConfig cfg = load_with_overrides(o);
  const SweepAxis axis = parse_axis(axis_name);
  RunOptions opts;
  opts.exec = o.serial ? Exec::Serial : Exec::Parallel;
  const SweepTable t = sweep(cfg, axis, parse_values(values), opts);
  ensure_dir(cfg.out_dir);
  const fs::path path = cfg.out_dir / ("sweep_" + std::string(to_string(axis)) + ".csv");
  {
    auto f = open_out(path);
    t.write_csv(f);
  }
  t.write_csv(std::cout);
  std::cerr << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, bool include_free, const std::string& out) {
  const OccupancyGrid pred = read_grid(pred_path);
  const OccupancyGrid gt = read_grid(gt_path);
  if (!(pred.spec().nx == gt.spec().nx && pred.spec().ny == gt.spec().ny && pred.spec().nz == gt.spec().nz))
    throw ConfigError("prediction and ground truth have different dimensions");
  const ClassIoU iou = iou_per_class(pred, gt);
  std::ostringstream csv;
  csv << "class,iou\n";
  for (int c = 0; c < kNumClasses; ++c) {
    csv << class_name(c) << ',';
    if (iou[static_cast<std::size_t>(c)]) csv << std::fixed << std::setprecision(6) << *iou[static_cast<std::size_t>(c)];
    csv << '\n';
  }
  const auto m = try_miou(iou, include_free);
  csv << "miou,";
  if (m) csv << std::fixed << std::setprecision(6) << *m;
  csv << '\n';
  std::cout << csv.str();
  if (!out.empty()) {
    ensure_dir(out);
    auto f = open_out(fs::path(out) / "eval.csv");
    f << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-UAV collaborative occupancy perception simulator"};
  app.require_subcommand(1);

  Overrides gen_o, run_o, sweep_o;
  std::string points, axis, values, pred, gt, eval_out;
  bool eval_free = false;

  auto* gen = app.add_subcommand("gen", "Generate a scene and write it as a container file");
  add_common(gen, gen_o);
  gen->add_option("--points", points, "Voxelize a labeled point cloud instead of generating");

  auto* run = app.add_subcommand("run", "Run a scenario and write report, delivery log and summary");
  add_common(run, run_o);

  auto* sw = app.add_subcommand("sweep", "Run a scenario once per axis value");
  add_common(sw, sweep_o);
  sw->add_option("--axis", axis, "uav_count, xi, budget or theta")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();

  auto* ev = app.add_subcommand("eval", "Score a predicted grid against ground truth");
  ev->add_option("--pred", pred, "Predicted labels container")->required();
  ev->add_option("--gt", gt, "Ground-truth labels container")->required();
  ev->add_flag("--include-free", eval_free, "Include the free class in mIoU");
  ev->add_option("--out", eval_out, "Also write eval.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) {
      if (gen_o.threads > 0) set_threads(gen_o.threads);
      return cmd_gen(gen_o, points);
    }
    if (*run) return cmd_run(run_o);
    if (*sw) return cmd_sweep(sweep_o, axis, values);
    if (*ev) return cmd_eval(pred, gt, eval_free, eval_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DecodeError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const UndefinedResult& e) {
    std::cerr << "undefined result: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
