#pragma once

// Simulation world types: mass-spring networks, actuation channels, the
// rigid elliptical object, integrator configuration, and trajectories.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "codesign/io/csv.hpp"

namespace codesign::sim {

using Eigen::Vector2d;

struct Node {
  Vector2d pos{0.0, 0.0};
  double mass = 1.0;
  bool pinned = false;  // pinned nodes are kinematic anchors
};

struct Spring {
  int i = 0;
  int j = 0;
  double rest = 1.0;       // m
  double stiffness = 0.0;  // N/m
  int channel = -1;        // actuation channel, -1 = passive
  double weight = 0.0;     // effective rest = rest * (1 + weight * channel value)
};

struct SpringNetwork {
  std::vector<Node> nodes;
  std::vector<Spring> springs;

  // Valid when springs are well-formed and every connected component is
  // anchored: either the whole graph is one component, or each component
  // contains a pinned node (two separate fingers hang from pinned bases).
  void validate() const {
    const int n = static_cast<int>(nodes.size());
    for (const Node& nd : nodes)
      if (!(nd.mass > 0.0)) throw std::invalid_argument("SpringNetwork: node mass must be > 0");
    for (const Spring& s : springs) {
      if (s.i == s.j) throw std::invalid_argument("SpringNetwork: spring endpoints equal");
      if (s.i < 0 || s.j < 0 || s.i >= n || s.j >= n)
        throw std::invalid_argument("SpringNetwork: spring endpoint out of range");
      if (!(s.rest > 0.0)) throw std::invalid_argument("SpringNetwork: rest length must be > 0");
      if (s.stiffness < 0.0) throw std::invalid_argument("SpringNetwork: negative stiffness");
    }
    // union-find over spring edges
    std::vector<int> parent(nodes.size());
    for (int k = 0; k < n; ++k) parent[k] = k;
    auto find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (const Spring& s : springs) parent[find(s.i)] = find(s.j);
    std::vector<bool> anchored(nodes.size(), false);
    int components = 0;
    for (int k = 0; k < n; ++k)
      if (find(k) == k) ++components;
    if (components <= 1) return;
    for (int k = 0; k < n; ++k)
      if (nodes[k].pinned) anchored[find(k)] = true;
    for (int k = 0; k < n; ++k)
      if (!anchored[find(k)])
        throw std::invalid_argument("SpringNetwork: disconnected component without a pinned anchor");
  }
};

// A time-dependent dimensionless rest-length scale shared by a group of
// springs. Locomotion uses sinusoids, manipulation piecewise-constant
// curvature schedules that freeze after their last segment.
struct Channel {
  enum class Kind { Sinusoid, PiecewiseConstant };
  Kind kind = Kind::Sinusoid;
  std::vector<double> params;     // Sinusoid: {A, omega, phase}; Piecewise: segment values
  double segment_duration = 0.0;  // piecewise only, seconds

  int segment_index(double t) const {
    int k = static_cast<int>(std::floor(t / segment_duration));
    if (k < 0) k = 0;
    int last = static_cast<int>(params.size()) - 1;
    return k > last ? last : k;
  }

  double value(double t) const {
    if (kind == Kind::Sinusoid) return params[0] * std::sin(params[1] * t + params[2]);
    return params[segment_index(t)];
  }

  // Accumulates d(loss)/d(params) given the cotangent of value(t).
  void accumulate_value_grad(double t, double vbar, double* pbar) const {
    if (kind == Kind::Sinusoid) {
      const double phase = params[1] * t + params[2];
      pbar[0] += vbar * std::sin(phase);
      pbar[1] += vbar * params[0] * t * std::cos(phase);
      pbar[2] += vbar * params[0] * std::cos(phase);
    } else {
      pbar[segment_index(t)] += vbar;
    }
  }
};

struct Actuation {
  std::vector<Channel> channels;

  double value(int channel, double t) const {
    return channel < 0 ? 0.0 : channels[static_cast<std::size_t>(channel)].value(t);
  }
};

struct RigidEllipse {
  Vector2d center{0.0, 0.0};
  double angle = 0.0;      // rad
  double semi_major = 0.1; // m
  double semi_minor = 0.05;
  double mass = 0.1;       // kg
  double inertia = 1e-4;   // kg m^2
  Vector2d lin_vel{0.0, 0.0};
  double ang_vel = 0.0;

  void validate() const {
    if (!(semi_major >= semi_minor && semi_minor > 0.0))
      throw std::invalid_argument("RigidEllipse: requires semi_major >= semi_minor > 0");
    if (!(mass > 0.0 && inertia > 0.0))
      throw std::invalid_argument("RigidEllipse: mass and inertia must be > 0");
  }

  // Uniform-density ellipse.
  static double inertia_for(double mass, double a, double b) {
    return mass * (a * a + b * b) / 4.0;
  }
};

// Piecewise-constant torque windows applied to the object from start_time on.
struct TorqueSchedule {
  double start_time = 0.0;
  double window_duration = 0.0;
  std::vector<double> torques;

  double value(double t) const {
    if (torques.empty() || t < start_time) return 0.0;
    int k = static_cast<int>(std::floor((t - start_time) / window_duration));
    int last = static_cast<int>(torques.size()) - 1;
    if (k < 0) k = 0;
    return torques[k > last ? last : k];
  }
};

struct SimConfig {
  double dt = 4e-3;
  int steps = 1024;
  Vector2d gravity{0.0, -9.8};
  double ground_height = 0.0;
  double contact_stiffness = 2e3;    // node-ground penalty, N/m
  double contact_damping = 12.0;     // N s/m
  double tangential_friction = 0.8;  // Coulomb coefficient, smoothed by tanh
  double friction_vel_eps = 0.02;    // m/s, tanh smoothing scale
  double spring_damping = 0.6;       // global axial damping, N s/m
  double ellipse_contact_stiffness = 400.0;   // node-object penalty
  double ellipse_contact_damping = 2.0;
  double object_ground_stiffness = 2e3;       // object-ground penalty
  double object_ground_damping = 10.0;
  std::optional<TorqueSchedule> external_torque;
  int record_stride = 1;

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be > 0");
    if (steps < 1) throw std::invalid_argument("SimConfig: steps must be >= 1");
    if (contact_stiffness < 0.0) throw std::invalid_argument("SimConfig: negative contact stiffness");
  }
};

struct EllipsePose {
  Vector2d center{0.0, 0.0};
  double angle = 0.0;
};

struct Trajectory {
  int record_stride = 1;
  std::vector<std::vector<Vector2d>> nodes;  // one entry per recorded step
  std::vector<EllipsePose> ellipse;          // same length when an object is present

  std::size_t frames() const { return nodes.size(); }
};

// Node rows go to `path`; when an object is present its poses go to a
// sibling file "<stem>_ellipse.csv" with columns (step, ellipse_x,
// ellipse_y, ellipse_angle).
inline void write_trajectory_csv(const Trajectory& traj, const std::string& path,
                                 const std::vector<std::string>& comments = {}) {
  io::CsvWriter w(path);
  for (const auto& c : comments) w.comment(c);
  w.header({"step", "node_id", "x", "y"});
  for (std::size_t f = 0; f < traj.nodes.size(); ++f) {
    const long long step = static_cast<long long>(f) * traj.record_stride;
    for (std::size_t n = 0; n < traj.nodes[f].size(); ++n)
      w.row({std::to_string(step), std::to_string(n), io::format_double(traj.nodes[f][n].x()),
             io::format_double(traj.nodes[f][n].y())});
  }
  if (!traj.ellipse.empty()) {
    std::string stem = path;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
    io::CsvWriter we(stem + "_ellipse.csv");
    for (const auto& c : comments) we.comment(c);
    we.header({"step", "ellipse_x", "ellipse_y", "ellipse_angle"});
    for (std::size_t f = 0; f < traj.ellipse.size(); ++f) {
      const long long step = static_cast<long long>(f) * traj.record_stride;
      we.row({std::to_string(step), io::format_double(traj.ellipse[f].center.x()),
              io::format_double(traj.ellipse[f].center.y()),
              io::format_double(traj.ellipse[f].angle)});
    }
  }
}

struct SimulationDiverged : std::runtime_error {
  int step;
  explicit SimulationDiverged(int step_index)
      : std::runtime_error("simulation diverged (non-finite state) at step " +
                           std::to_string(step_index)),
        step(step_index) {}
};

struct GradientOverflow : std::runtime_error {
  GradientOverflow()
      : std::runtime_error("gradient overflow: a partial exceeded 1e12; dt is likely unstable") {}
};

}  // namespace codesign::sim
