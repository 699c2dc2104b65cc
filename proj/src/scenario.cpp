// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcop/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mcop/errors.hpp"
#include "mcop/rng.hpp"

namespace mcop {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Collects schema problems instead of stopping at the first one.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& issues) : issues_(issues) {}

  void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
        issues_.push_back(join(path, it.key()) + ": unknown key");
    }
  }

  bool object(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_object()) {
      issues_.push_back(join(path, key) + ": expected an object");
      return false;
    }
    return true;
  }

  void number(const json& obj, const char* key, const std::string& path, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_number()) {
      issues_.push_back(join(path, key) + ": expected a number");
      return;
    }
    out = v.get<double>();
  }

  template <typename Int>
  void integer(const json& obj, const char* key, const std::string& path, Int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj[key];
    if (!v.is_number_integer()) {
      issues_.push_back(join(path, key) + ": expected an integer");
      return;
    }
    if (std::is_unsigned_v<Int> && v.is_number_integer() && !v.is_number_unsigned()) {
      issues_.push_back(join(path, key) + ": must be >= 0");
      return;
    }
    if (std::is_unsigned_v<Int>) {
      const auto u = v.get<std::uint64_t>();
      if (u > std::numeric_limits<Int>::max()) {
        issues_.push_back(join(path, key) + ": out of range");
        return;
      }
      out = static_cast<Int>(u);
    } else {
      const auto s = v.get<std::int64_t>();
      if (s < std::numeric_limits<Int>::min() || s > std::numeric_limits<Int>::max()) {
        issues_.push_back(join(path, key) + ": out of range");
        return;
      }
      out = static_cast<Int>(s);
    }
  }

  void boolean(const json& obj, const char* key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_boolean()) {
      issues_.push_back(join(path, key) + ": expected true or false");
      return;
    }
    out = obj[key].get<bool>();
  }

  void string(const json& obj, const char* key, const std::string& path, std::string& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_string()) {
      issues_.push_back(join(path, key) + ": expected a string");
      return;
    }
    out = obj[key].get<std::string>();
  }

  std::optional<Vec3> vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      issues_.push_back(where + ": expected [x, y, z]");
      return std::nullopt;
    }
    return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

  void vec3(const json& obj, const char* key, const std::string& path, Vec3& out) {
    if (!obj.contains(key)) return;
    if (auto v = vec3(obj[key], join(path, key))) out = *v;
  }

  // null -> nullopt; integer -> value.
  void optional_bytes(const json& obj, const char* key, const std::string& path, std::optional<std::uint64_t>& out) {
    if (!obj.contains(key)) return;
    if (obj[key].is_null()) {
      out.reset();
      return;
    }
    std::uint64_t v = 0;
    const std::size_t before = issues_.size();
    integer(obj, key, path, v);
    if (issues_.size() == before) out = v;
  }

  void issue(std::string s) { issues_.push_back(std::move(s)); }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

 private:
  std::vector<std::string>& issues_;
};

ChannelMap load_psi(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open channel map " + path.string());
  return ChannelMap::parse(in);
}

std::optional<double> mean_of(const std::vector<std::optional<double>>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& x : v)
    if (x) {
      s += *x;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

std::string fmt(std::optional<double> v, int precision = 6) {
  if (!v) return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

}  // namespace

Pose UavSpec::camera_pose(std::uint32_t round) const {
  Vec3 p = position + velocity * static_cast<double>(round);
  if (!trajectory.empty()) p = trajectory.at(std::min<std::size_t>(round, trajectory.size() - 1));
  return Pose::nadir_camera(p, yaw, tilt);
}

void ScenarioConfig::validate() const {
  std::vector<std::string> issues;
  auto collect = [&](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    }
  };
  collect([&] { grid.validate(); });
  if (grid.nx > 65535 || grid.ny > 65535) issues.emplace_back("grid: nx and ny must fit in 16 bits");
  if (grid.nz < 2) issues.emplace_back("grid: nz must be >= 2");
  collect([&] { effective_scene().validate(); });
  if (!(hfov > 0.0 && hfov < std::numbers::pi)) issues.emplace_back("camera.hfov_deg must be in (0, 180)");
  if (!(vfov > 0.0 && vfov < std::numbers::pi)) issues.emplace_back("camera.vfov_deg must be in (0, 180)");
  if (rays_per_axis < 1 || rays_per_axis > 8192) issues.emplace_back("camera.rays_per_axis must be in [1, 8192]");
  if (uavs.empty()) issues.emplace_back("uavs: at least one UAV is required");
  if (uavs.size() > 65535) issues.emplace_back("uavs: too many UAVs");
  if (rounds < 1) issues.emplace_back("rounds must be >= 1");
  for (std::size_t k = 0; k < uavs.size(); ++k) {
    const auto& u = uavs[k];
    const std::string at = "uavs[" + std::to_string(k) + "]";
    if (!u.trajectory.empty() && u.trajectory.size() < rounds)
      issues.push_back(at + ".trajectory: needs one position per round");
    for (std::uint32_t r = 0; r < rounds; ++r) {
      const Pose p = u.camera_pose(r);
      if (!(p.translation.z > grid.origin.z)) {
        issues.push_back(at + ": altitude must be above the grid floor in every round");
        break;
      }
    }
    if (!std::isfinite(u.yaw) || !std::isfinite(u.tilt)) issues.push_back(at + ": yaw and tilt must be finite");
  }
  if (edges) {
    for (const auto& [a, b] : *edges) {
      const int n = static_cast<int>(uavs.size());
      if (a < 0 || b < 0 || a >= n || b >= n) {
        issues.push_back("graph.edges: [" + std::to_string(a) + ", " + std::to_string(b) + "] names an unknown UAV");
      } else if (a == b) {
        issues.push_back("graph.edges: self-loop on " + std::to_string(a));
      }
    }
  }
  collect([&] { encoder.validate(); });
  if (!(theta > 0.0 && theta < 1.0)) issues.emplace_back("theta must be in (0, 1)");
  collect([&] { quality.validate(); });
  collect([&] { fusion.validate(); });
  if (!(budget.drop_probability >= 0.0 && budget.drop_probability <= 1.0))
    issues.emplace_back("budget.drop_probability must be in [0, 1]");
  if (psi_file) {
    try {
      const ChannelMap m = load_psi(*psi_file);
      if (!m.invertible()) issues.emplace_back("psi_file: class block is rank deficient, fusion cannot decode it");
      if (m.out_channels() > 255) issues.emplace_back("psi_file: at most 255 output channels");
    } catch (const ParseError& e) {
      issues.push_back("psi_file: " + std::string(e.what()));
    } catch (const IoError& e) {
      issues.push_back("psi_file: " + std::string(e.what()));
    }
  }
  if (threads < 0) issues.emplace_back("threads must be >= 0");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

CommGraph ScenarioConfig::graph() const {
  const int n = static_cast<int>(uavs.size());
  if (!edges) return CommGraph::full(n);
  CommGraph g(n);
  for (const auto& [a, b] : *edges)
    if (!g.connected(a, b)) g.add_edge(a, b);
  return g;
}

SceneParams ScenarioConfig::effective_scene() const {
  SceneParams s = scene;
  s.seed = hash_combine(seed, 0x7363656e65ULL);
  return s;
}

std::uint64_t ScenarioConfig::noise_seed() const {
  return noise_seed_from_seed ? hash_combine(seed, 0x6e6f697365ULL) : encoder.noise_seed;
}

ScenarioConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");

  std::vector<std::string> issues;
  Reader rd(issues);
  ScenarioConfig cfg;
  rd.keys(root, "", {"name", "seed", "grid", "scene", "camera", "uavs", "rounds", "graph", "encoder", "theta", "quality",
                     "dmpg", "budget", "fusion", "include_free", "threads", "psi_file", "output"});
  rd.string(root, "name", "", cfg.name);
  rd.integer(root, "seed", "", cfg.seed);

  if (!root.contains("grid")) rd.issue("grid: required");
  if (rd.object(root, "grid", "")) {
    const json& g = root["grid"];
    rd.keys(g, "grid", {"dims", "voxel_size", "origin"});
    if (!g.contains("dims")) {
      rd.issue("grid.dims: required");
    } else {
      const json& d = g["dims"];
      if (!d.is_array() || d.size() != 3 || !std::all_of(d.begin(), d.end(), [](const json& e) { return e.is_number_integer(); })) {
        rd.issue("grid.dims: expected [nx, ny, nz] integers");
      } else {
        cfg.grid.nx = d[0].get<std::int64_t>();
        cfg.grid.ny = d[1].get<std::int64_t>();
        cfg.grid.nz = d[2].get<std::int64_t>();
      }
    }
    rd.number(g, "voxel_size", "grid", cfg.grid.voxel_size);
    rd.vec3(g, "origin", "grid", cfg.grid.origin);
  }

  if (rd.object(root, "scene", "")) {
    const json& s = root["scene"];
    rd.keys(s, "scene", {"building_density", "vegetation_density", "vehicle_count", "road_grid_pitch", "target_occupancy_fraction"});
    rd.number(s, "building_density", "scene", cfg.scene.building_density);
    rd.number(s, "vegetation_density", "scene", cfg.scene.vegetation_density);
    rd.integer(s, "vehicle_count", "scene", cfg.scene.vehicle_count);
    rd.number(s, "road_grid_pitch", "scene", cfg.scene.road_grid_pitch);
    rd.number(s, "target_occupancy_fraction", "scene", cfg.scene.target_occupancy_fraction);
  }

  if (rd.object(root, "camera", "")) {
    const json& c = root["camera"];
    rd.keys(c, "camera", {"hfov_deg", "vfov_deg", "rays_per_axis"});
    double h = cfg.hfov / kDeg, v = cfg.vfov / kDeg;
    rd.number(c, "hfov_deg", "camera", h);
    rd.number(c, "vfov_deg", "camera", v);
    cfg.hfov = h * kDeg;
    cfg.vfov = v * kDeg;
    rd.integer(c, "rays_per_axis", "camera", cfg.rays_per_axis);
  }

  if (!root.contains("uavs")) {
    rd.issue("uavs: required");
  } else if (!root["uavs"].is_array()) {
    rd.issue("uavs: expected an array");
  } else {
    for (std::size_t k = 0; k < root["uavs"].size(); ++k) {
      const json& u = root["uavs"][k];
      const std::string at = "uavs[" + std::to_string(k) + "]";
      UavSpec spec;
      if (!u.is_object()) {
        rd.issue(at + ": expected an object");
        cfg.uavs.push_back(spec);
        continue;
      }
      rd.keys(u, at, {"position", "yaw_deg", "tilt_deg", "velocity", "trajectory"});
      if (!u.contains("position") && !u.contains("trajectory")) rd.issue(at + ": position or trajectory required");
      rd.vec3(u, "position", at, spec.position);
      double yaw = 0.0, tilt = 0.0;
      rd.number(u, "yaw_deg", at, yaw);
      rd.number(u, "tilt_deg", at, tilt);
      spec.yaw = yaw * kDeg;
      spec.tilt = tilt * kDeg;
      rd.vec3(u, "velocity", at, spec.velocity);
      if (u.contains("trajectory")) {
        if (!u["trajectory"].is_array()) {
          rd.issue(at + ".trajectory: expected an array of positions");
        } else {
          for (std::size_t r = 0; r < u["trajectory"].size(); ++r)
            if (auto p = rd.vec3(u["trajectory"][r], at + ".trajectory[" + std::to_string(r) + "]")) spec.trajectory.push_back(*p);
          if (!spec.trajectory.empty() && !u.contains("position")) spec.position = spec.trajectory.front();
        }
      }
      cfg.uavs.push_back(spec);
    }
  }

  rd.integer(root, "rounds", "", cfg.rounds);

  if (root.contains("graph")) {
    const json& g = root["graph"];
    if (g.is_string()) {
      const auto s = g.get<std::string>();
      if (s == "full") {
        cfg.edges.reset();
      } else if (s == "none") {
        cfg.edges = std::vector<std::pair<int, int>>{};
      } else {
        rd.issue("graph: expected \"full\", \"none\" or {\"edges\": [...]}");
      }
    } else if (g.is_object()) {
      rd.keys(g, "graph", {"edges"});
      cfg.edges = std::vector<std::pair<int, int>>{};
      if (g.contains("edges") && g["edges"].is_array()) {
        for (const auto& e : g["edges"]) {
          if (e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[1].is_number_integer()) {
            cfg.edges->emplace_back(e[0].get<int>(), e[1].get<int>());
          } else {
            rd.issue("graph.edges: each edge must be [i, j]");
          }
        }
      } else {
        rd.issue("graph.edges: expected an array");
      }
    } else {
      rd.issue("graph: expected \"full\", \"none\" or {\"edges\": [...]}");
    }
  }

  if (rd.object(root, "encoder", "")) {
    const json& e = root["encoder"];
    rd.keys(e, "encoder", {"logit_margin", "noise_sigma", "noise_seed", "edge_falloff"});
    rd.number(e, "logit_margin", "encoder", cfg.encoder.logit_margin);
    rd.number(e, "noise_sigma", "encoder", cfg.encoder.noise_sigma);
    if (e.contains("noise_seed")) {
      cfg.noise_seed_from_seed = false;
      rd.integer(e, "noise_seed", "encoder", cfg.encoder.noise_seed);
    }
    rd.number(e, "edge_falloff", "encoder", cfg.encoder.edge_falloff);
  }

  rd.number(root, "theta", "", cfg.theta);

  if (rd.object(root, "quality", "")) {
    const json& q = root["quality"];
    rd.keys(q, "quality", {"alpha", "beta", "xi", "epsilon_floor"});
    rd.number(q, "alpha", "quality", cfg.quality.alpha);
    rd.number(q, "beta", "quality", cfg.quality.beta);
    rd.number(q, "xi", "quality", cfg.quality.xi);
    rd.number(q, "epsilon_floor", "quality", cfg.quality.epsilon_floor);
  }

  rd.boolean(root, "dmpg", "", cfg.dmpg);

  if (rd.object(root, "budget", "")) {
    const json& b = root["budget"];
    rd.keys(b, "budget", {"bytes_per_round", "drop_probability", "link_byte_cap", "impairment_seed"});
    rd.optional_bytes(b, "bytes_per_round", "budget", cfg.budget.bytes_per_round);
    rd.number(b, "drop_probability", "budget", cfg.budget.drop_probability);
    rd.optional_bytes(b, "link_byte_cap", "budget", cfg.budget.link_byte_cap);
    rd.integer(b, "impairment_seed", "budget", cfg.budget.impairment_seed);
  }

  if (rd.object(root, "fusion", "")) {
    const json& f = root["fusion"];
    rd.keys(f, "fusion", {"g_expand", "ego_floor"});
    rd.number(f, "g_expand", "fusion", cfg.fusion.g_expand);
    rd.number(f, "ego_floor", "fusion", cfg.fusion.ego_floor);
  }

  rd.boolean(root, "include_free", "", cfg.include_free);
  rd.integer(root, "threads", "", cfg.threads);

  if (root.contains("psi_file")) {
    std::string p;
    rd.string(root, "psi_file", "", p);
    if (!p.empty()) {
      std::filesystem::path fp(p);
      cfg.psi_file = fp.is_absolute() ? fp : base_dir / fp;
    }
  }

  if (rd.object(root, "output", "")) {
    const json& o = root["output"];
    rd.keys(o, "output", {"dir"});
    std::string d;
    rd.string(o, "dir", "output", d);
    if (!d.empty()) cfg.out_dir = d;
  }

  // Report value errors alongside schema errors so one pass lists everything.
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    for (const auto& s : e.issues())
      if (std::find(issues.begin(), issues.end(), s) == issues.end()) issues.push_back(s);
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::string config_to_json(const ScenarioConfig& cfg) {
  auto v3 = [](const Vec3& v) { return ojson::array({v.x, v.y, v.z}); };
  ojson j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["grid"] = {{"dims", {cfg.grid.nx, cfg.grid.ny, cfg.grid.nz}}, {"voxel_size", cfg.grid.voxel_size}, {"origin", v3(cfg.grid.origin)}};
  j["scene"] = {{"building_density", cfg.scene.building_density},
                {"vegetation_density", cfg.scene.vegetation_density},
                {"vehicle_count", cfg.scene.vehicle_count},
                {"road_grid_pitch", cfg.scene.road_grid_pitch},
                {"target_occupancy_fraction", cfg.scene.target_occupancy_fraction}};
  j["camera"] = {{"hfov_deg", cfg.hfov / kDeg}, {"vfov_deg", cfg.vfov / kDeg}, {"rays_per_axis", cfg.rays_per_axis}};
  ojson uavs = ojson::array();
  for (const auto& u : cfg.uavs) {
    ojson e;
    e["position"] = v3(u.position);
    e["yaw_deg"] = u.yaw / kDeg;
    e["tilt_deg"] = u.tilt / kDeg;
    e["velocity"] = v3(u.velocity);
    if (!u.trajectory.empty()) {
      ojson t = ojson::array();
      for (const auto& p : u.trajectory) t.push_back(v3(p));
      e["trajectory"] = t;
    }
    uavs.push_back(e);
  }
  j["uavs"] = uavs;
  j["rounds"] = cfg.rounds;
  if (!cfg.edges) {
    j["graph"] = "full";
  } else {
    ojson edges = ojson::array();
    for (const auto& [a, b] : *cfg.edges) edges.push_back({a, b});
    j["graph"] = {{"edges", edges}};
  }
  j["encoder"] = {{"logit_margin", cfg.encoder.logit_margin},
                  {"noise_sigma", cfg.encoder.noise_sigma},
                  {"noise_seed", cfg.noise_seed()},
                  {"edge_falloff", cfg.encoder.edge_falloff}};
  j["theta"] = cfg.theta;
  j["quality"] = {{"alpha", cfg.quality.alpha}, {"beta", cfg.quality.beta}, {"xi", cfg.quality.xi},
                  {"epsilon_floor", cfg.quality.epsilon_floor}};
  j["dmpg"] = cfg.dmpg;
  ojson b;
  b["bytes_per_round"] = cfg.budget.bytes_per_round ? ojson(*cfg.budget.bytes_per_round) : ojson(nullptr);
  b["drop_probability"] = cfg.budget.drop_probability;
  b["link_byte_cap"] = cfg.budget.link_byte_cap ? ojson(*cfg.budget.link_byte_cap) : ojson(nullptr);
  b["impairment_seed"] = cfg.budget.impairment_seed;
  j["budget"] = b;
  j["fusion"] = {{"g_expand", cfg.fusion.g_expand}, {"ego_floor", cfg.fusion.ego_floor}};
  j["include_free"] = cfg.include_free;
  j["threads"] = cfg.threads;
  if (cfg.psi_file) j["psi_file"] = cfg.psi_file->string();
  j["output"] = {{"dir", cfg.out_dir.string()}};
  return j.dump(2);
}

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.threads > 0) set_threads(cfg.threads);

  const GridSpec& spec = cfg.grid;
  const OccupancyGrid gt = generate_scene(spec, cfg.effective_scene());
  const ChannelMap psi = cfg.psi_file ? load_psi(*cfg.psi_file) : ChannelMap::identity();
  const CommGraph graph = cfg.graph();
  const std::size_t n = cfg.uavs.size();
  const Exec exec = opts.exec;

  FusionParams fp = cfg.fusion;
  fp.psi = psi;

  RunReport rep;
  rep.name = cfg.name;
  rep.seed = cfg.seed;
  rep.uav_count = n;
  rep.rounds = cfg.rounds;
  rep.include_free = cfg.include_free;
  rep.occupied_fraction = gt.occupied_fraction();
  rep.config_echo = config_to_json(cfg);
  rep.per_uav.resize(n);

  std::vector<ConfusionCounts> collab(n), solo(n);
  if (opts.trace) {
    opts.trace->ground_truth = gt;
    opts.trace->rounds.clear();
  }

  for (std::uint32_t r = 0; r < cfg.rounds; ++r) {
    std::vector<AgentState> agents(n);
    std::vector<FeatureVolume> volumes;
    std::vector<Mask3D> visible;
    std::vector<Pose> cameras;
    volumes.reserve(n);
    visible.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const CameraModel cam{cfg.uavs[k].camera_pose(r), cfg.hfov, cfg.vfov, cfg.rays_per_axis};
      cameras.push_back(cam.pose);
      visible.push_back(raycast_visibility(gt, cam, exec));
      EncoderParams ep = cfg.encoder;
      ep.noise_seed = hash_combine(hash_combine(cfg.noise_seed(), r), k);
      volumes.push_back(encode_local(gt, visible.back(), cam.pose, ep, exec));

      AgentState& a = agents[k];
      a.id = static_cast<std::uint16_t>(k);
      a.frame = Pose{};
      a.bev = compress(volumes.back(), cfg.theta, psi, exec);
      a.quality = quality_map(a.bev, cam.pose, cfg.quality);
      if (cfg.dmpg) {
        a.support = support_mask(a.quality, spec, cfg.quality.xi);
        a.request = request_mask(a.support);
      } else {
        a.support = Mask2D(spec.nx, spec.ny, true);
        a.request = a.support;
      }
    }

    RoundResult res = run_round(agents, graph, cfg.budget, r, exec);

    RoundTrace* rt = nullptr;
    if (opts.trace) {
      opts.trace->rounds.emplace_back();
      rt = &opts.trace->rounds.back();
    }
    for (std::size_t k = 0; k < n; ++k) {
      FeatureVolume fused = integrate(volumes[k], res.inbox[k], fp, exec);
      OccupancyGrid pred = predict(fused, exec);
      collab[k].add(pred, gt);
      solo[k].add(predict(volumes[k], exec), gt);
      rep.per_uav[k].egress_bytes += res.egress[k];
      rep.ledger_bytes += res.egress[k];
      if (rt)
        rt->agents.push_back(AgentTrace{cameras[k], std::move(visible[k]), std::move(volumes[k]), std::move(agents[k]),
                                        std::move(fused), std::move(pred)});
    }
    rep.log.append(res.log);
    if (rt) rt->exchange = std::move(res);
  }

  rep.log_bytes = total_bytes(rep.log);
  rep.request_bytes = total_bytes(rep.log, ByteScope{std::nullopt, std::nullopt, MsgKind::kRequest});
  rep.feature_bytes = total_bytes(rep.log, ByteScope{std::nullopt, std::nullopt, MsgKind::kFeature});
  for (const auto& rec : rep.log.records) {
    if (rec.kind != MsgKind::kFeature) continue;
    if (rec.bytes > 0) ++rep.feature_messages;
    if (rec.delivered) rep.delivered_cells += rec.cells;
    rep.truncated_cells += rec.truncated_cells;
  }

  std::vector<std::optional<double>> mious;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<std::optional<double>> per;
    for (std::size_t k = 0; k < n; ++k) {
      if (c == 0) {
        auto& m = rep.per_uav[k];
        m.iou = collab[k].iou();
        m.miou = try_miou(m.iou, cfg.include_free);
        m.solo_iou = solo[k].iou();
        m.solo_miou = try_miou(m.solo_iou, cfg.include_free);
        mious.push_back(m.miou);
      }
      per.push_back(rep.per_uav[k].iou[static_cast<std::size_t>(c)]);
    }
    rep.mean_iou[static_cast<std::size_t>(c)] = mean_of(per);
  }
  rep.ego_miou = rep.per_uav[0].miou;
  rep.solo_ego_miou = rep.per_uav[0].solo_miou;
  rep.mean_miou = mean_of(mious);
  rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "uav_count" || s == "uavs") return SweepAxis::kUavCount;
  if (s == "xi") return SweepAxis::kXi;
  if (s == "budget") return SweepAxis::kBudget;
  if (s == "theta") return SweepAxis::kTheta;
  throw ConfigError("unknown sweep axis '" + s + "' (expected uav_count, xi, budget or theta)");
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kUavCount: return "uav_count";
    case SweepAxis::kXi: return "xi";
    case SweepAxis::kBudget: return "budget";
    case SweepAxis::kTheta: return "theta";
  }
  return "?";
}

ScenarioConfig with_axis_value(ScenarioConfig cfg, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::kUavCount: {
      if (!(value >= 1.0) || value != std::floor(value) || value > static_cast<double>(cfg.uavs.size()))
        throw ConfigError("uav_count " + std::to_string(value) + " must be an integer in [1, " +
                          std::to_string(cfg.uavs.size()) + "]");
      const auto k = static_cast<std::size_t>(value);
      cfg.uavs.resize(k);
      if (cfg.edges) {
        std::erase_if(*cfg.edges, [k](const auto& e) {
          return e.first >= static_cast<int>(k) || e.second >= static_cast<int>(k);
        });
      }
      break;
    }
    case SweepAxis::kXi:
      cfg.quality.xi = value;
      break;
    case SweepAxis::kBudget:
      if (value < 0.0 || std::isinf(value)) {
        cfg.budget.bytes_per_round.reset();
      } else if (value != std::floor(value) || value > 1.8e19) {
        throw ConfigError("budget must be a whole number of bytes");
      } else {
        cfg.budget.bytes_per_round = static_cast<std::uint64_t>(value);
      }
      break;
    case SweepAxis::kTheta:
      cfg.theta = value;
      break;
  }
  cfg.validate();
  return cfg;
}

SweepTable sweep(const ScenarioConfig& cfg, SweepAxis axis, const std::vector<double>& values, const RunOptions& opts) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ScenarioConfig> cfgs;
  for (double v : values) cfgs.push_back(with_axis_value(cfg, axis, v));  // validate everything up front

  SweepTable t;
  t.axis = axis;
  t.values = values;
  RunOptions o = opts;
  o.trace = nullptr;
  for (const auto& c : cfgs) t.reports.push_back(run_scenario(c, o));
  if (axis == SweepAxis::kXi) {
    ScenarioConfig base = cfg;
    base.dmpg = false;
    t.baseline = run_scenario(base, o);
    t.baseline_name = "no_dmpg";
  } else {
    t.baseline = t.reports.front();
    t.baseline_name = std::string(to_string(axis)) + "=" + fmt(values.front(), 6);
  }
  return t;
}

void SweepTable::write_csv(std::ostream& out) const {
  out << to_string(axis)
      << ",ego_miou,solo_ego_miou,mean_miou,total_mb,mb_per_round,feature_mb_per_round,mb_per_transmission,"
         "ledger_bytes,log_bytes,request_bytes,feature_bytes,feature_messages,delivered_cells,truncated_cells,"
         "baseline,loss_ratio_percent,loss_points\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const RunReport& r = reports[i];
    std::optional<double> ratio, points;
    if (baseline && baseline->mean_miou && *baseline->mean_miou > 0.0 && r.mean_miou) {
      const AccuracyLoss l = accuracy_loss(*baseline->mean_miou * 100.0, *r.mean_miou * 100.0);
      ratio = l.ratio_percent;
      points = l.points;
    }
    std::ostringstream v;
    v << values[i];
    out << v.str() << ',' << fmt(r.ego_miou) << ',' << fmt(r.solo_ego_miou) << ',' << fmt(r.mean_miou) << ','
        << fmt(to_megabytes(r.log_bytes), 9) << ',' << fmt(r.mb_per_round(), 9) << ',' << fmt(r.feature_mb_per_round(), 9)
        << ',' << fmt(r.mb_per_transmission(), 9) << ',' << r.ledger_bytes << ',' << r.log_bytes << ',' << r.request_bytes
        << ',' << r.feature_bytes << ',' << r.feature_messages << ',' << r.delivered_cells << ',' << r.truncated_cells
        << ',' << baseline_name << ',' << fmt(ratio, 4) << ',' << fmt(points, 4) << '\n';
  }
}

void write_report_csv(const RunReport& r, std::ostream& out) {
  out << "uav,miou,solo_miou";
  for (int c = 0; c < kNumClasses; ++c) out << ",iou_" << class_name(c);
  out << ",egress_bytes\n";
  for (std::size_t k = 0; k < r.per_uav.size(); ++k) {
    const auto& m = r.per_uav[k];
    out << k << ',' << fmt(m.miou) << ',' << fmt(m.solo_miou);
    for (const auto& v : m.iou) out << ',' << fmt(v);
    out << ',' << m.egress_bytes << '\n';
  }
  std::vector<std::optional<double>> solo;
  for (const auto& m : r.per_uav) solo.push_back(m.solo_miou);
  out << "mean," << fmt(r.mean_miou) << ',' << fmt(mean_of(solo));
  for (const auto& v : r.mean_iou) out << ',' << fmt(v);
  out << ',' << r.ledger_bytes << '\n';
}

void write_summary(const RunReport& r, std::ostream& out) {
  auto pct = [](std::optional<double> v) { return v ? fmt(*v * 100.0, 2) : std::string("undefined"); };
  out << "scenario      " << r.name << " (seed " << r.seed << ", " << r.uav_count << " UAVs, " << r.rounds << " rounds)\n";
  out << "occupied      " << fmt(r.occupied_fraction * 100.0, 2) << "% of voxels\n";
  out << "mIoU classes  " << (r.include_free ? "free + occupied" : "occupied only") << '\n';
  out << "ego mIoU      " << pct(r.ego_miou) << " (solo " << pct(r.solo_ego_miou) << ")\n";
  out << "mean mIoU     " << pct(r.mean_miou) << '\n';
  out << "per class     ";
  for (int c = 0; c < kNumClasses; ++c)
    out << class_name(c) << '=' << pct(r.mean_iou[static_cast<std::size_t>(c)])
        << (c + 1 < kNumClasses ? " " : "\n");
  out << "bytes         " << r.log_bytes << " total (" << r.request_bytes << " request, " << r.feature_bytes << " feature)\n";
  out << "CV            " << fmt(to_megabytes(r.log_bytes), 6) << " MB, " << fmt(r.mb_per_round(), 6) << " MB/round, "
      << fmt(r.mb_per_transmission(), 6) << " MB/transmission\n";
  out << "cells         " << r.delivered_cells << " delivered, " << r.truncated_cells << " truncated\n";
  out << "wall clock    " << fmt(r.wall_clock_seconds, 3) << " s\n";
}

}  // namespace mcop
