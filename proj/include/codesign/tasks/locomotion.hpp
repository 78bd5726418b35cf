#pragma once

// Locomotion co-design tasks: 2D voxel walkers whose springs carry the
// morphology parameters (rest-length and stiffness scales) and whose actuator
// groups carry the control parameters (amplitude, frequency, phase of a
// sinusoidal rest-length drive). Loss is negated forward travel of the
// center of mass.
//
// Canonical layouts (documented in data/tasks/*.json):
//   loc84  — 3-voxel body, two 2-voxel legs at spans 0 and 2; 36 springs,
//            4 actuator groups (one per leg voxel, driving its diagonals);
//            2*36 + 3*4 = 84 parameters, 72 morphology + 12 control.
//   loc155 — 6-voxel body, three 2-voxel legs at spans 0, 2, 5; 61 springs,
//            11 groups (6 leg voxels + body diagonals grouped
//            {0},{1},{2,3},{4},{5}); 2*61 + 3*11 = 155, 122 + 33.

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "codesign/sim/engine.hpp"
#include "codesign/space.hpp"
#include "codesign/task.hpp"

namespace codesign::tasks {

using sim::Actuation;
using sim::Channel;
using sim::SimConfig;
using sim::SpringNetwork;

struct LocomotionTaskDef {
  std::string name;
  SpringNetwork base;  // baseline geometry; rest = as-built distance, stiffness = base value
  std::vector<std::vector<int>> actuator_groups;  // spring indices per group
  double rest_var = 0.2;
  double stiff_var = 0.6;
  double amp_lo = 0.0, amp_hi = 0.30;
  double omega_lo = 2.0, omega_hi = 14.0;
  double phase_lo = -M_PI, phase_hi = M_PI;
  SimConfig sim;

  int spring_count() const { return static_cast<int>(base.springs.size()); }
  int group_count() const { return static_cast<int>(actuator_groups.size()); }
  int dim() const { return 2 * spring_count() + 3 * group_count(); }
  int morph_dim() const { return 2 * spring_count(); }
};

namespace detail {

// Voxel-grid network builder with deterministic node and spring ordering.
class GridBuilder {
 public:
  explicit GridBuilder(double cell, double clearance, double mass)
      : cell_(cell), clearance_(clearance), mass_(mass) {}

  int node(int cx, int cy) {
    auto it = index_.find({cx, cy});
    if (it != index_.end()) return it->second;
    sim::Node n;
    n.pos = {cx * cell_, cy * cell_ + clearance_};
    n.mass = mass_;
    net_.nodes.push_back(n);
    int id = static_cast<int>(net_.nodes.size()) - 1;
    index_.emplace(std::make_pair(cx, cy), id);
    return id;
  }

  // Returns the spring index, or the existing one for a duplicate edge.
  int spring(int a, int b, double stiffness) {
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto it = edges_.find(key);
    if (it != edges_.end()) return it->second;
    sim::Spring s;
    s.i = a;
    s.j = b;
    s.rest = (net_.nodes[a].pos - net_.nodes[b].pos).norm();
    s.stiffness = stiffness;
    net_.springs.push_back(s);
    int id = static_cast<int>(net_.springs.size()) - 1;
    edges_.emplace(key, id);
    return id;
  }

  SpringNetwork take() { return std::move(net_); }

 private:
  double cell_, clearance_, mass_;
  SpringNetwork net_;
  std::map<std::pair<int, int>, int> index_;
  std::map<std::pair<int, int>, int> edges_;
};

struct WalkerPlan {
  int body_cols = 3;
  std::vector<int> leg_spans;  // left column of each leg
  int leg_depth = 2;
  double voxel = 0.1;
  double clearance = 0.002;
  double node_mass = 0.1;
  double stiffness = 600.0;
};

// Body row occupies grid rows [leg_depth, leg_depth+1]; legs grow downward.
inline void build_walker(const WalkerPlan& plan, SpringNetwork& net,
                         std::vector<std::vector<int>>& leg_voxel_diagonals,
                         std::vector<std::vector<int>>& body_voxel_diagonals) {
  GridBuilder gb(plan.voxel, plan.clearance, plan.node_mass);
  const int yb = plan.leg_depth;      // body bottom row
  const int yt = plan.leg_depth + 1;  // body top row
  body_voxel_diagonals.assign(static_cast<std::size_t>(plan.body_cols), {});
  for (int v = 0; v < plan.body_cols; ++v) {
    int bl = gb.node(v, yb), br = gb.node(v + 1, yb);
    int tl = gb.node(v, yt), tr = gb.node(v + 1, yt);
    gb.spring(bl, br, plan.stiffness);
    gb.spring(tl, tr, plan.stiffness);
    gb.spring(bl, tl, plan.stiffness);
    gb.spring(br, tr, plan.stiffness);
    body_voxel_diagonals[v].push_back(gb.spring(tl, br, plan.stiffness));
    body_voxel_diagonals[v].push_back(gb.spring(bl, tr, plan.stiffness));
  }
  leg_voxel_diagonals.clear();
  for (int leg : plan.leg_spans) {
    for (int d = 0; d < plan.leg_depth; ++d) {
      int ytop = yb - d, ybot = yb - d - 1;
      int tl = gb.node(leg, ytop), tr = gb.node(leg + 1, ytop);
      int bl = gb.node(leg, ybot), br = gb.node(leg + 1, ybot);
      gb.spring(tl, bl, plan.stiffness);
      gb.spring(tr, br, plan.stiffness);
      gb.spring(bl, br, plan.stiffness);
      std::vector<int> diag;
      diag.push_back(gb.spring(tl, br, plan.stiffness));
      diag.push_back(gb.spring(bl, tr, plan.stiffness));
      leg_voxel_diagonals.push_back(std::move(diag));
    }
  }
  net = gb.take();
}

}  // namespace detail

inline SimConfig default_locomotion_sim() {
  SimConfig cfg;
  cfg.dt = 4e-3;
  cfg.steps = 1024;
  cfg.gravity = {0.0, -9.8};
  cfg.ground_height = 0.0;
  cfg.contact_stiffness = 600.0;
  cfg.contact_damping = 8.0;
  cfg.tangential_friction = 0.8;
  cfg.friction_vel_eps = 0.2;
  cfg.spring_damping = 1.6;
  cfg.record_stride = 1024;
  return cfg;
}

inline LocomotionTaskDef make_loc84() {
  LocomotionTaskDef def;
  def.name = "Loc84";
  def.sim = default_locomotion_sim();
  detail::WalkerPlan plan;
  plan.body_cols = 3;
  plan.leg_spans = {0, 2};
  std::vector<std::vector<int>> leg_diag, body_diag;
  detail::build_walker(plan, def.base, leg_diag, body_diag);
  def.actuator_groups = leg_diag;  // one group per leg voxel
  return def;
}

inline LocomotionTaskDef make_loc155() {
  LocomotionTaskDef def;
  def.name = "Loc155";
  def.sim = default_locomotion_sim();
  detail::WalkerPlan plan;
  plan.body_cols = 6;
  plan.leg_spans = {0, 2, 5};
  std::vector<std::vector<int>> leg_diag, body_diag;
  detail::build_walker(plan, def.base, leg_diag, body_diag);
  def.actuator_groups = leg_diag;
  // body diagonals grouped {0},{1},{2,3},{4},{5}
  def.actuator_groups.push_back(body_diag[0]);
  def.actuator_groups.push_back(body_diag[1]);
  {
    std::vector<int> mid = body_diag[2];
    mid.insert(mid.end(), body_diag[3].begin(), body_diag[3].end());
    def.actuator_groups.push_back(std::move(mid));
  }
  def.actuator_groups.push_back(body_diag[4]);
  def.actuator_groups.push_back(body_diag[5]);
  return def;
}

// Parameter layout: [rest scales (S), stiffness scales (S),
// (A, omega, phase) per group (3G)], all in [0,1] box coordinates.
inline ParameterSpace locomotion_space(const LocomotionTaskDef& def) {
  ParameterSpace s = ParameterSpace::unit_box(def.morph_dim(), 3 * def.group_count());
  s.validate();
  return s;
}

struct DecodedLocomotion {
  SpringNetwork net;
  Actuation act;
};

inline DecodedLocomotion decode_locomotion(const LocomotionTaskDef& def, const CoDesign& x) {
  const int S = def.spring_count();
  DecodedLocomotion d;
  d.net = def.base;
  for (int k = 0; k < S; ++k) {
    const double u = 2.0 * x[k] - 1.0;
    const double w = 2.0 * x[S + k] - 1.0;
    d.net.springs[k].rest = def.base.springs[k].rest * (1.0 + def.rest_var * u);
    d.net.springs[k].stiffness = def.base.springs[k].stiffness * (1.0 + def.stiff_var * w);
  }
  for (int g = 0; g < def.group_count(); ++g) {
    Channel ch;
    ch.kind = Channel::Kind::Sinusoid;
    const int base = 2 * S + 3 * g;
    ch.params = {def.amp_lo + (def.amp_hi - def.amp_lo) * x[base],
                 def.omega_lo + (def.omega_hi - def.omega_lo) * x[base + 1],
                 def.phase_lo + (def.phase_hi - def.phase_lo) * x[base + 2]};
    d.act.channels.push_back(std::move(ch));
    for (int sidx : def.actuator_groups[g]) {
      d.net.springs[sidx].channel = g;
      d.net.springs[sidx].weight = 1.0;
    }
  }
  return d;
}

// Inverse of decode_locomotion; exact on the box interior.
inline CoDesign encode_locomotion(const LocomotionTaskDef& def, const DecodedLocomotion& d) {
  const int S = def.spring_count();
  CoDesign x(def.dim());
  for (int k = 0; k < S; ++k) {
    const double u = (d.net.springs[k].rest / def.base.springs[k].rest - 1.0) / def.rest_var;
    const double w =
        (d.net.springs[k].stiffness / def.base.springs[k].stiffness - 1.0) / def.stiff_var;
    x[k] = (u + 1.0) / 2.0;
    x[S + k] = (w + 1.0) / 2.0;
  }
  for (int g = 0; g < def.group_count(); ++g) {
    const auto& p = d.act.channels[static_cast<std::size_t>(g)].params;
    const int base = 2 * S + 3 * g;
    x[base] = (p[0] - def.amp_lo) / (def.amp_hi - def.amp_lo);
    x[base + 1] = (p[1] - def.omega_lo) / (def.omega_hi - def.omega_lo);
    x[base + 2] = (p[2] - def.phase_lo) / (def.phase_hi - def.phase_lo);
  }
  return x;
}

// Loss of a recorded trajectory: negated center-of-mass x displacement.
inline double locomotion_loss(const sim::Trajectory& traj) {
  if (traj.nodes.empty()) throw std::invalid_argument("locomotion_loss: empty trajectory");
  const auto& first = traj.nodes.front();
  const auto& last = traj.nodes.back();
  double c0 = 0.0, cT = 0.0;
  for (std::size_t n = 0; n < first.size(); ++n) {
    c0 += first[n].x();
    cT += last[n].x();
  }
  return (c0 - cT) / static_cast<double>(first.size());
}

// Chain rule from simulator parameter gradients back to box coordinates.
inline Vec locomotion_box_gradient(const LocomotionTaskDef& def, const sim::ParamGrad& pg) {
  const int S = def.spring_count();
  Vec g = Vec::Zero(def.dim());
  for (int k = 0; k < S; ++k) {
    g[k] = pg.rest[k] * def.base.springs[k].rest * def.rest_var * 2.0;
    g[S + k] = pg.stiffness[k] * def.base.springs[k].stiffness * def.stiff_var * 2.0;
  }
  for (int gidx = 0; gidx < def.group_count(); ++gidx) {
    const int base = 2 * S + 3 * gidx;
    g[base] = pg.channels[gidx][0] * (def.amp_hi - def.amp_lo);
    g[base + 1] = pg.channels[gidx][1] * (def.omega_hi - def.omega_lo);
    g[base + 2] = pg.channels[gidx][2] * (def.phase_hi - def.phase_lo);
  }
  return g;
}

inline TaskHandle make_locomotion_handle(std::shared_ptr<const LocomotionTaskDef> def) {
  TaskHandle h;
  h.name = def->name;
  h.space = locomotion_space(*def);
  const sim::LossSpec loss{sim::LossSpec::Kind::NegComDisplacementX, 0.0, 1.0};
  h.evaluate = [def, loss](const CoDesign& x) -> Evaluation {
    DecodedLocomotion d = decode_locomotion(*def, x);
    try {
      return {sim::rollout(d.net, d.act, std::nullopt, def->sim, loss).loss, std::nullopt};
    } catch (const sim::SimulationDiverged&) {
      return {kDivergedLossSentinel, std::nullopt};
    }
  };
  h.evaluate_with_gradient = [def, loss](const CoDesign& x) -> Evaluation {
    DecodedLocomotion d = decode_locomotion(*def, x);
    try {
      auto res = sim::rollout_with_gradient(d.net, d.act, std::nullopt, def->sim, loss);
      return {res.loss, locomotion_box_gradient(*def, res.grad)};
    } catch (const sim::SimulationDiverged&) {
      return {kDivergedLossSentinel, Vec::Zero(x.size())};
    } catch (const sim::GradientOverflow&) {
      return {kDivergedLossSentinel, Vec::Zero(x.size())};
    }
  };
  return h;
}

inline nlohmann::json to_json(const LocomotionTaskDef& def) {
  nlohmann::json j;
  j["kind"] = "locomotion";
  j["name"] = def.name;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : def.base.nodes)
    nodes.push_back({{"x", n.pos.x()}, {"y", n.pos.y()}, {"mass", n.mass}, {"pinned", n.pinned}});
  j["nodes"] = nodes;
  nlohmann::json springs = nlohmann::json::array();
  for (const auto& s : def.base.springs)
    springs.push_back({{"i", s.i}, {"j", s.j}, {"rest", s.rest}, {"stiffness", s.stiffness}});
  j["springs"] = springs;
  j["actuator_groups"] = def.actuator_groups;
  j["rest_var"] = def.rest_var;
  j["stiff_var"] = def.stiff_var;
  j["amplitude_range"] = {def.amp_lo, def.amp_hi};
  j["omega_range"] = {def.omega_lo, def.omega_hi};
  j["phase_range"] = {def.phase_lo, def.phase_hi};
  j["sim"] = {{"dt", def.sim.dt},
              {"steps", def.sim.steps},
              {"gravity_y", def.sim.gravity.y()},
              {"ground_height", def.sim.ground_height},
              {"contact_stiffness", def.sim.contact_stiffness},
              {"contact_damping", def.sim.contact_damping},
              {"tangential_friction", def.sim.tangential_friction},
              {"friction_vel_eps", def.sim.friction_vel_eps},
              {"spring_damping", def.sim.spring_damping},
              {"record_stride", def.sim.record_stride}};
  return j;
}

inline LocomotionTaskDef locomotion_from_json(const nlohmann::json& j) {
  LocomotionTaskDef def;
  def.name = j.at("name").get<std::string>();
  for (const auto& n : j.at("nodes")) {
    sim::Node node;
    node.pos = {n.at("x").get<double>(), n.at("y").get<double>()};
    node.mass = n.at("mass").get<double>();
    node.pinned = n.at("pinned").get<bool>();
    def.base.nodes.push_back(node);
  }
  for (const auto& s : j.at("springs")) {
    sim::Spring sp;
    sp.i = s.at("i").get<int>();
    sp.j = s.at("j").get<int>();
    sp.rest = s.at("rest").get<double>();
    sp.stiffness = s.at("stiffness").get<double>();
    def.base.springs.push_back(sp);
  }
  def.actuator_groups = j.at("actuator_groups").get<std::vector<std::vector<int>>>();
  def.rest_var = j.at("rest_var").get<double>();
  def.stiff_var = j.at("stiff_var").get<double>();
  def.amp_lo = j.at("amplitude_range")[0].get<double>();
  def.amp_hi = j.at("amplitude_range")[1].get<double>();
  def.omega_lo = j.at("omega_range")[0].get<double>();
  def.omega_hi = j.at("omega_range")[1].get<double>();
  def.phase_lo = j.at("phase_range")[0].get<double>();
  def.phase_hi = j.at("phase_range")[1].get<double>();
  const auto& sj = j.at("sim");
  def.sim = default_locomotion_sim();
  def.sim.dt = sj.at("dt").get<double>();
  def.sim.steps = sj.at("steps").get<int>();
  def.sim.gravity = {0.0, sj.at("gravity_y").get<double>()};
  def.sim.ground_height = sj.at("ground_height").get<double>();
  def.sim.contact_stiffness = sj.at("contact_stiffness").get<double>();
  def.sim.contact_damping = sj.at("contact_damping").get<double>();
  def.sim.tangential_friction = sj.at("tangential_friction").get<double>();
  def.sim.friction_vel_eps = sj.at("friction_vel_eps").get<double>();
  def.sim.spring_damping = sj.at("spring_damping").get<double>();
  def.sim.record_stride = sj.at("record_stride").get<int>();
  def.base.validate();
  return def;
}

}  // namespace codesign::tasks
