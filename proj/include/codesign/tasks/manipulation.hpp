#pragma once

// Manipulation co-design tasks: two soft fingers, each a hanging ladder of
// spring cells with a pinned base, rotating a rigid elliptical object resting
// on the ground between them. Morphology parameters: per-spring stiffness,
// per-cell length L and width W, and one base offset O per finger. Control
// parameters: curvature values per (finger, strand) with per-segment scaling,
// realized as differential rest-length scaling between the two longitudinal
// strands of each cell over a 5-segment schedule that freezes at half time.
// In the second half, piecewise-random torques disturb the object.
//
// Canonical construction per finger (documented in data/tasks/*.json):
// C cells; springs in order [base rung, per cell (inner side, outer side,
// lower rung), 3 diagonal braces on the cells nearest the base], which gives
// exactly 1 + 3C + 3 springs: 61 for mani212 (C=19), 91 for mani320 (C=29).
// Parameter totals land on 212 = 200 + 12 and 320 = 300 + 20.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "codesign/rng.hpp"
#include "codesign/sim/engine.hpp"
#include "codesign/space.hpp"
#include "codesign/task.hpp"

namespace codesign::tasks {

struct ManipulationTaskDef {
  std::string name;
  int cells = 19;  // per finger
  double target = M_PI / 2.0;
  double base_len = 0.018;   // cell length baseline, m
  double base_width = 0.04;  // cell width baseline, m
  double gap_half = 0.12;    // finger base centerline distance from origin
  double o_range = 0.04;     // base offset range, +-m
  double tip_clearance = 0.015;
  double node_mass = 0.03;
  double base_stiffness = 400.0;
  double stiff_var = 0.33;
  double len_var = 0.25;
  double width_var = 0.10;
  double kappa_max = 0.25;
  double scale_lo = 0.25, scale_hi = 1.75;
  bool shared_half_scales = true;  // mani212: one scale set per finger
  double ellipse_a = 0.09, ellipse_b = 0.055, ellipse_mass = 0.15;
  double init_angle_range = 0.35;  // rad
  double init_x_range = 0.025;     // m
  double axis_scale_lo = 0.85, axis_scale_hi = 1.15;
  double torque_max = 0.003;  // N m
  int torque_windows = 10;
  int n_envs = 20;
  sim::SimConfig sim;

  int springs_per_finger() const { return 1 + 3 * cells + 3; }
  int stiffness_dim() const { return 2 * springs_per_finger(); }
  int geometry_dim() const { return 4 * cells + 2; }
  int morph_dim() const { return stiffness_dim() + geometry_dim(); }
  int ctrl_dim() const { return 4 + (shared_half_scales ? 2 : 4) * 4; }
  int dim() const { return morph_dim() + ctrl_dim(); }
  double y_top() const { return cells * base_len + tip_clearance; }
  double first_half_time() const { return 0.5 * sim.steps * sim.dt; }

  // box index helpers
  int idx_stiff(int finger, int s) const { return finger * springs_per_finger() + s; }
  int idx_len(int finger, int cell) const { return stiffness_dim() + finger * 2 * cells + cell; }
  int idx_width(int finger, int cell) const {
    return stiffness_dim() + finger * 2 * cells + cells + cell;
  }
  int idx_offset(int finger) const { return stiffness_dim() + 4 * cells + finger; }
  int idx_kappa(int finger, int strand) const { return morph_dim() + 2 * finger + strand; }
  // k in [1, 4]: scale of segments 2..5 (segment 1 is pinned to 1)
  int idx_scale(int finger, int strand, int k) const {
    if (shared_half_scales) return morph_dim() + 4 + finger * 4 + (k - 1);
    return morph_dim() + 4 + (finger * 2 + strand) * 4 + (k - 1);
  }
};

// Gentle gravity: the fingers hang from pinned bases and must hold their
// shape against gravity while staying in the integrator's stable regime.
inline sim::SimConfig default_manipulation_sim() {
  sim::SimConfig cfg;
  cfg.dt = 4e-3;
  cfg.steps = 1000;
  cfg.gravity = {0.0, -1.0};
  cfg.ground_height = 0.0;
  cfg.contact_stiffness = 400.0;
  cfg.contact_damping = 4.0;
  cfg.tangential_friction = 0.8;
  cfg.friction_vel_eps = 0.2;
  cfg.spring_damping = 1.5;
  cfg.ellipse_contact_stiffness = 400.0;
  cfg.ellipse_contact_damping = 2.0;
  cfg.object_ground_stiffness = 2e3;
  cfg.object_ground_damping = 10.0;
  cfg.record_stride = 1000;
  return cfg;
}

inline ManipulationTaskDef make_mani212() {
  ManipulationTaskDef def;
  def.name = "Mani212";
  def.cells = 19;
  def.target = M_PI / 2.0;
  def.shared_half_scales = true;
  def.base_len = 0.018;
  def.base_width = 0.04;
  def.sim = default_manipulation_sim();
  return def;
}

inline ManipulationTaskDef make_mani320() {
  ManipulationTaskDef def;
  def.name = "Mani320";
  def.cells = 29;
  def.target = M_PI;
  def.shared_half_scales = false;
  def.base_len = 0.012;
  def.base_width = 0.032;
  def.sim = default_manipulation_sim();
  return def;
}

inline ParameterSpace manipulation_space(const ManipulationTaskDef& def) {
  ParameterSpace s = ParameterSpace::unit_box(def.morph_dim(), def.ctrl_dim());
  s.validate();
  return s;
}

// Decoded world plus everything the gradient chain and the encoder need.
struct DecodedManipulation {
  sim::SpringNetwork net;    // both fingers, nodes finger0 then finger1
  sim::Actuation act;        // channels: (f0,inner) (f0,outer) (f1,inner) (f1,outer)
  Mat position_jacobian;     // (2 n_nodes) x geometry_dim, in box coordinates
  std::vector<double> kappa;     // 4 decoded curvature values
  std::vector<double> scales;    // decoded segment scales, layout per task variant
  std::vector<double> stiffness; // decoded per spring (2 per-finger blocks)
  std::vector<double> L, W;      // decoded per (finger, cell), finger-major
  double O[2] = {0.0, 0.0};
};

namespace detail {

inline int mani_node_id(const ManipulationTaskDef& def, int finger, int rung, int strand) {
  return finger * 2 * (def.cells + 1) + 2 * rung + strand;  // strand 0 = inner
}

}  // namespace detail

inline DecodedManipulation decode_manipulation(const ManipulationTaskDef& def, const CoDesign& x) {
  DecodedManipulation d;
  const int C = def.cells;
  const int n_nodes = 4 * (C + 1);
  const int n_geo = def.geometry_dim();

  d.L.resize(2 * C);
  d.W.resize(2 * C);
  for (int f = 0; f < 2; ++f)
    for (int c = 0; c < C; ++c) {
      d.L[f * C + c] = def.base_len * (1.0 + def.len_var * (2.0 * x[def.idx_len(f, c)] - 1.0));
      d.W[f * C + c] = def.base_width * (1.0 + def.width_var * (2.0 * x[def.idx_width(f, c)] - 1.0));
    }
  d.O[0] = def.o_range * (2.0 * x[def.idx_offset(0)] - 1.0);
  d.O[1] = def.o_range * (2.0 * x[def.idx_offset(1)] - 1.0);

  d.net.nodes.resize(n_nodes);
  d.position_jacobian = Mat::Zero(2 * n_nodes, n_geo);
  // geometry column order: [L f0 | W f0 | L f1 | W f1 | O0 | O1]
  auto col_len = [&](int f, int c) { return f * 2 * C + c; };
  auto col_width = [&](int f, int c) { return f * 2 * C + C + c; };
  auto col_off = [&](int f) { return 4 * C + f; };
  const double dL_dz = 2.0 * def.base_len * def.len_var;
  const double dW_dz = 2.0 * def.base_width * def.width_var;
  const double dO_dz = 2.0 * def.o_range;

  for (int f = 0; f < 2; ++f) {
    const double inner_sign = (f == 0) ? 1.0 : -1.0;  // inner strand faces the object
    const double x_base = (f == 0) ? -def.gap_half + d.O[f] : def.gap_half + d.O[f];
    double y = def.y_top();
    for (int r = 0; r <= C; ++r) {
      double w;
      if (r == 0)
        w = d.W[f * C + 0];
      else if (r == C)
        w = d.W[f * C + C - 1];
      else
        w = 0.5 * (d.W[f * C + r - 1] + d.W[f * C + r]);
      for (int strand = 0; strand < 2; ++strand) {
        const double s_sign = (strand == 0) ? inner_sign : -inner_sign;
        const int id = detail::mani_node_id(def, f, r, strand);
        sim::Node node;
        node.pos = {x_base + s_sign * 0.5 * w, y};
        node.mass = def.node_mass;
        node.pinned = (r == 0);
        d.net.nodes[id] = node;
        // Jacobian rows 2*id (x) and 2*id+1 (y)
        d.position_jacobian(2 * id, col_off(f)) = dO_dz;
        if (r == 0) {
          d.position_jacobian(2 * id, col_width(f, 0)) = s_sign * 0.5 * dW_dz;
        } else if (r == C) {
          d.position_jacobian(2 * id, col_width(f, C - 1)) = s_sign * 0.5 * dW_dz;
        } else {
          d.position_jacobian(2 * id, col_width(f, r - 1)) = s_sign * 0.25 * dW_dz;
          d.position_jacobian(2 * id, col_width(f, r)) = s_sign * 0.25 * dW_dz;
        }
        for (int b = 0; b < r; ++b) d.position_jacobian(2 * id + 1, col_len(f, b)) = -dL_dz;
      }
      if (r < C) y -= d.L[f * C + r];
    }
  }

  // channels first: springs reference them by index
  d.kappa.resize(4);
  for (int f = 0; f < 2; ++f)
    for (int h = 0; h < 2; ++h)
      d.kappa[2 * f + h] = def.kappa_max * (2.0 * x[def.idx_kappa(f, h)] - 1.0);
  const int n_scales = (def.shared_half_scales ? 2 : 4) * 4;
  d.scales.resize(n_scales);
  for (int f = 0; f < 2; ++f)
    for (int h = 0; h < (def.shared_half_scales ? 1 : 2); ++h)
      for (int k = 1; k <= 4; ++k) {
        const int idx = def.idx_scale(f, h, k) - def.morph_dim() - 4;
        d.scales[idx] = def.scale_lo + (def.scale_hi - def.scale_lo) * x[def.idx_scale(f, h, k)];
      }
  const double seg_dur = def.first_half_time() / 5.0;
  for (int f = 0; f < 2; ++f)
    for (int h = 0; h < 2; ++h) {
      sim::Channel ch;
      ch.kind = sim::Channel::Kind::PiecewiseConstant;
      ch.segment_duration = seg_dur;
      ch.params.resize(5);
      for (int k = 0; k < 5; ++k) {
        double s = 1.0;
        if (k >= 1) s = d.scales[def.idx_scale(f, h, k) - def.morph_dim() - 4];
        ch.params[k] = d.kappa[2 * f + h] * s;
      }
      d.act.channels.push_back(std::move(ch));
    }

  // springs: stiffness from x, rest length from built geometry
  d.stiffness.resize(def.stiffness_dim());
  // stiffness params are laid out in global spring order, finger 0 then 1
  auto add_spring = [&](int a, int b, int channel, double weight) {
    sim::Spring s;
    s.i = a;
    s.j = b;
    s.rest = (d.net.nodes[a].pos - d.net.nodes[b].pos).norm();
    const int sidx = static_cast<int>(d.net.springs.size());
    const double k = def.base_stiffness * (1.0 + def.stiff_var * (2.0 * x[sidx] - 1.0));
    s.stiffness = k;
    d.stiffness[sidx] = k;
    s.channel = channel;
    s.weight = weight;
    d.net.springs.push_back(s);
  };
  for (int f = 0; f < 2; ++f) {
    auto node = [&](int r, int strand) { return detail::mani_node_id(def, f, r, strand); };
    add_spring(node(0, 0), node(0, 1), -1, 0.0);  // base rung, both ends pinned
    for (int c = 0; c < C; ++c) {
      add_spring(node(c, 0), node(c + 1, 0), 2 * f + 0, -1.0);  // inner strand shortens
      add_spring(node(c, 1), node(c + 1, 1), 2 * f + 1, +1.0);  // outer strand lengthens
      add_spring(node(c + 1, 0), node(c + 1, 1), -1, 0.0);      // lower rung
    }
    for (int c = 0; c < 3; ++c) add_spring(node(c, 0), node(c + 1, 1), -1, 0.0);  // braces
  }
  return d;
}

// Inverse of decode_manipulation; exact on the box (the decoded structure
// carries kappa and the segment scales explicitly, so the multiplicative
// schedule inverts without division).
inline CoDesign encode_manipulation(const ManipulationTaskDef& def,
                                    const DecodedManipulation& d) {
  CoDesign x(def.dim());
  const int C = def.cells;
  for (int s = 0; s < def.stiffness_dim(); ++s)
    x[s] = ((d.stiffness[s] / def.base_stiffness - 1.0) / def.stiff_var + 1.0) / 2.0;
  for (int f = 0; f < 2; ++f)
    for (int c = 0; c < C; ++c) {
      x[def.idx_len(f, c)] = ((d.L[f * C + c] / def.base_len - 1.0) / def.len_var + 1.0) / 2.0;
      x[def.idx_width(f, c)] =
          ((d.W[f * C + c] / def.base_width - 1.0) / def.width_var + 1.0) / 2.0;
    }
  x[def.idx_offset(0)] = (d.O[0] / def.o_range + 1.0) / 2.0;
  x[def.idx_offset(1)] = (d.O[1] / def.o_range + 1.0) / 2.0;
  for (int f = 0; f < 2; ++f)
    for (int h = 0; h < 2; ++h)
      x[def.idx_kappa(f, h)] = (d.kappa[2 * f + h] / def.kappa_max + 1.0) / 2.0;
  for (int f = 0; f < 2; ++f)
    for (int h = 0; h < (def.shared_half_scales ? 1 : 2); ++h)
      for (int k = 1; k <= 4; ++k) {
        const int flat = def.idx_scale(f, h, k) - def.morph_dim() - 4;
        x[def.idx_scale(f, h, k)] =
            (d.scales[flat] - def.scale_lo) / (def.scale_hi - def.scale_lo);
      }
  return x;
}

struct EnvironmentDraw {
  sim::RigidEllipse ellipse;
  sim::TorqueSchedule torques;
};

// Deterministic given (master seed, env index); draw order: initial angle,
// initial x, major-axis scale, then the torque windows.
inline EnvironmentDraw draw_environment(const ManipulationTaskDef& def, const Rng& task_rng,
                                        int env_index) {
  Rng rng = task_rng.derive({0xe417ull, static_cast<std::uint64_t>(env_index)});
  EnvironmentDraw env;
  const double theta0 = rng.uniform(-def.init_angle_range, def.init_angle_range);
  const double cx = rng.uniform(-def.init_x_range, def.init_x_range);
  const double scale = rng.uniform(def.axis_scale_lo, def.axis_scale_hi);
  sim::RigidEllipse& e = env.ellipse;
  e.semi_major = def.ellipse_a * scale;
  e.semi_minor = def.ellipse_b;
  e.mass = def.ellipse_mass;
  e.inertia = sim::RigidEllipse::inertia_for(e.mass, e.semi_major, e.semi_minor);
  const double sn = std::sin(theta0), cs = std::cos(theta0);
  const double support =
      std::sqrt(e.semi_major * e.semi_major * sn * sn + e.semi_minor * e.semi_minor * cs * cs);
  e.center = {cx, def.sim.ground_height + support + 0.002};
  e.angle = theta0;
  env.torques.start_time = def.first_half_time();
  env.torques.window_duration = def.first_half_time() / def.torque_windows;
  env.torques.torques.resize(static_cast<std::size_t>(def.torque_windows));
  for (int w = 0; w < def.torque_windows; ++w)
    env.torques.torques[static_cast<std::size_t>(w)] =
        rng.uniform(-def.torque_max, def.torque_max);
  return env;
}

// Mean absolute rotation error over completed environment trajectories.
inline double manipulation_loss(const std::vector<sim::Trajectory>& trajectories, double target) {
  if (trajectories.empty()) throw std::invalid_argument("manipulation_loss: no trajectories");
  double sum = 0.0;
  for (const auto& traj : trajectories) {
    if (traj.ellipse.empty()) throw std::invalid_argument("manipulation_loss: missing object poses");
    sum += std::abs(traj.ellipse.back().angle - traj.ellipse.front().angle - target);
  }
  return sum / static_cast<double>(trajectories.size());
}

// Chain rule from simulator parameter gradients to box coordinates. Geometry
// gradients flow two ways: through node initial positions and through rest
// lengths, which equal the as-built node distances.
inline Vec manipulation_box_gradient(const ManipulationTaskDef& def,
                                     const DecodedManipulation& d, const sim::ParamGrad& pg) {
  Vec g = Vec::Zero(def.dim());
  for (int s = 0; s < def.stiffness_dim(); ++s)
    g[s] = pg.stiffness[s] * def.base_stiffness * def.stiff_var * 2.0;

  // position cotangents: x0 adjoint plus rest-length pullback
  const int n_nodes = static_cast<int>(d.net.nodes.size());
  Vec pos_bar = Vec::Zero(2 * n_nodes);
  for (int n = 0; n < n_nodes; ++n) {
    pos_bar[2 * n] = pg.x0[static_cast<std::size_t>(n)].x();
    pos_bar[2 * n + 1] = pg.x0[static_cast<std::size_t>(n)].y();
  }
  for (std::size_t s = 0; s < d.net.springs.size(); ++s) {
    const auto& sp = d.net.springs[s];
    const Eigen::Vector2d diff = d.net.nodes[sp.j].pos - d.net.nodes[sp.i].pos;
    const double len = diff.norm();
    if (len <= 0.0) continue;
    const Eigen::Vector2d u = diff / len;
    const double rb = pg.rest[static_cast<Eigen::Index>(s)];
    pos_bar[2 * sp.j] += rb * u.x();
    pos_bar[2 * sp.j + 1] += rb * u.y();
    pos_bar[2 * sp.i] -= rb * u.x();
    pos_bar[2 * sp.i + 1] -= rb * u.y();
  }
  Vec geo = d.position_jacobian.transpose() * pos_bar;
  for (int k = 0; k < def.geometry_dim(); ++k) g[def.stiffness_dim() + k] = geo[k];

  // curvature channels: value_{f,h,k} = kappa_{f,h} * scale_k (scale_1 = 1)
  const double dkappa_dz = 2.0 * def.kappa_max;
  const double dscale_dz = def.scale_hi - def.scale_lo;
  for (int f = 0; f < 2; ++f)
    for (int h = 0; h < 2; ++h) {
      const auto& vbar = pg.channels[static_cast<std::size_t>(2 * f + h)];
      const double kappa = d.kappa[static_cast<std::size_t>(2 * f + h)];
      double kappa_bar = 0.0;
      for (int k = 0; k < 5; ++k) {
        double s = 1.0;
        if (k >= 1) s = d.scales[static_cast<std::size_t>(def.idx_scale(f, h, k) - def.morph_dim() - 4)];
        kappa_bar += vbar[static_cast<std::size_t>(k)] * s;
        if (k >= 1)
          g[def.idx_scale(f, h, k)] += vbar[static_cast<std::size_t>(k)] * kappa * dscale_dz;
      }
      g[def.idx_kappa(f, h)] += kappa_bar * dkappa_dz;
    }
  return g;
}

inline TaskHandle make_manipulation_handle(std::shared_ptr<const ManipulationTaskDef> def,
                                           std::uint64_t master_seed) {
  TaskHandle h;
  h.name = def->name;
  h.space = manipulation_space(*def);
  auto envs = std::make_shared<std::vector<EnvironmentDraw>>();
  {
    Rng task_rng = Rng(master_seed).derive({0x7a5du, 0});
    for (int e = 0; e < def->n_envs; ++e) envs->push_back(draw_environment(*def, task_rng, e));
  }
  const sim::LossSpec loss_for{sim::LossSpec::Kind::AngleError, def->target, 1.0};

  h.evaluate = [def, envs, loss_for](const CoDesign& x) -> Evaluation {
    DecodedManipulation d = decode_manipulation(*def, x);
    double sum = 0.0;
    for (const auto& env : *envs) {
      sim::SimConfig cfg = def->sim;
      cfg.external_torque = env.torques;
      try {
        sum += sim::rollout(d.net, d.act, env.ellipse, cfg, loss_for).loss;
      } catch (const sim::SimulationDiverged&) {
        sum += kDivergedLossSentinel;
      }
    }
    return {sum / static_cast<double>(envs->size()), std::nullopt};
  };
  h.evaluate_with_gradient = [def, envs, loss_for](const CoDesign& x) -> Evaluation {
    DecodedManipulation d = decode_manipulation(*def, x);
    double sum = 0.0;
    Vec grad = Vec::Zero(def->dim());
    for (const auto& env : *envs) {
      sim::SimConfig cfg = def->sim;
      cfg.external_torque = env.torques;
      try {
        auto res = sim::rollout_with_gradient(d.net, d.act, env.ellipse, cfg, loss_for);
        sum += res.loss;
        grad += manipulation_box_gradient(*def, d, res.grad);
      } catch (const sim::SimulationDiverged&) {
        sum += kDivergedLossSentinel;
      } catch (const sim::GradientOverflow&) {
        sum += kDivergedLossSentinel;
      }
    }
    const double inv = 1.0 / static_cast<double>(envs->size());
    return {sum * inv, grad * inv};
  };
  return h;
}

inline nlohmann::json to_json(const ManipulationTaskDef& def) {
  nlohmann::json j;
  j["kind"] = "manipulation";
  j["name"] = def.name;
  j["cells_per_finger"] = def.cells;
  j["target_rotation_rad"] = def.target;
  j["base_len"] = def.base_len;
  j["base_width"] = def.base_width;
  j["gap_half"] = def.gap_half;
  j["offset_range"] = def.o_range;
  j["tip_clearance"] = def.tip_clearance;
  j["node_mass"] = def.node_mass;
  j["base_stiffness"] = def.base_stiffness;
  j["stiff_var"] = def.stiff_var;
  j["len_var"] = def.len_var;
  j["width_var"] = def.width_var;
  j["kappa_max"] = def.kappa_max;
  j["scale_range"] = {def.scale_lo, def.scale_hi};
  j["shared_half_scales"] = def.shared_half_scales;
  j["ellipse"] = {{"a", def.ellipse_a}, {"b", def.ellipse_b}, {"mass", def.ellipse_mass}};
  j["env"] = {{"n_envs", def.n_envs},
              {"init_angle_range", def.init_angle_range},
              {"init_x_range", def.init_x_range},
              {"axis_scale_range", {def.axis_scale_lo, def.axis_scale_hi}},
              {"torque_max", def.torque_max},
              {"torque_windows", def.torque_windows}};
  j["sim"] = {{"dt", def.sim.dt},
              {"steps", def.sim.steps},
              {"gravity_y", def.sim.gravity.y()},
              {"ground_height", def.sim.ground_height},
              {"contact_stiffness", def.sim.contact_stiffness},
              {"contact_damping", def.sim.contact_damping},
              {"tangential_friction", def.sim.tangential_friction},
              {"friction_vel_eps", def.sim.friction_vel_eps},
              {"spring_damping", def.sim.spring_damping},
              {"ellipse_contact_stiffness", def.sim.ellipse_contact_stiffness},
              {"ellipse_contact_damping", def.sim.ellipse_contact_damping},
              {"object_ground_stiffness", def.sim.object_ground_stiffness},
              {"object_ground_damping", def.sim.object_ground_damping},
              {"record_stride", def.sim.record_stride}};
  return j;
}

inline ManipulationTaskDef manipulation_from_json(const nlohmann::json& j) {
  ManipulationTaskDef def;
  def.name = j.at("name").get<std::string>();
  def.cells = j.at("cells_per_finger").get<int>();
  def.target = j.at("target_rotation_rad").get<double>();
  def.base_len = j.at("base_len").get<double>();
  def.base_width = j.at("base_width").get<double>();
  def.gap_half = j.at("gap_half").get<double>();
  def.o_range = j.at("offset_range").get<double>();
  def.tip_clearance = j.at("tip_clearance").get<double>();
  def.node_mass = j.at("node_mass").get<double>();
  def.base_stiffness = j.at("base_stiffness").get<double>();
  def.stiff_var = j.at("stiff_var").get<double>();
  def.len_var = j.at("len_var").get<double>();
  def.width_var = j.at("width_var").get<double>();
  def.kappa_max = j.at("kappa_max").get<double>();
  def.scale_lo = j.at("scale_range")[0].get<double>();
  def.scale_hi = j.at("scale_range")[1].get<double>();
  def.shared_half_scales = j.at("shared_half_scales").get<bool>();
  def.ellipse_a = j.at("ellipse").at("a").get<double>();
  def.ellipse_b = j.at("ellipse").at("b").get<double>();
  def.ellipse_mass = j.at("ellipse").at("mass").get<double>();
  const auto& env = j.at("env");
  def.n_envs = env.at("n_envs").get<int>();
  def.init_angle_range = env.at("init_angle_range").get<double>();
  def.init_x_range = env.at("init_x_range").get<double>();
  def.axis_scale_lo = env.at("axis_scale_range")[0].get<double>();
  def.axis_scale_hi = env.at("axis_scale_range")[1].get<double>();
  def.torque_max = env.at("torque_max").get<double>();
  def.torque_windows = env.at("torque_windows").get<int>();
  const auto& sj = j.at("sim");
  def.sim = default_manipulation_sim();
  def.sim.dt = sj.at("dt").get<double>();
  def.sim.steps = sj.at("steps").get<int>();
  def.sim.gravity = {0.0, sj.at("gravity_y").get<double>()};
  def.sim.ground_height = sj.at("ground_height").get<double>();
  def.sim.contact_stiffness = sj.at("contact_stiffness").get<double>();
  def.sim.contact_damping = sj.at("contact_damping").get<double>();
  def.sim.tangential_friction = sj.at("tangential_friction").get<double>();
  def.sim.friction_vel_eps = sj.at("friction_vel_eps").get<double>();
  def.sim.spring_damping = sj.at("spring_damping").get<double>();
  def.sim.ellipse_contact_stiffness = sj.at("ellipse_contact_stiffness").get<double>();
  def.sim.ellipse_contact_damping = sj.at("ellipse_contact_damping").get<double>();
  def.sim.object_ground_stiffness = sj.at("object_ground_stiffness").get<double>();
  def.sim.object_ground_damping = sj.at("object_ground_damping").get<double>();
  def.sim.record_stride = sj.at("record_stride").get<int>();
  return def;
}

}  // namespace codesign::tasks
