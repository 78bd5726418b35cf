#pragma once

// Semi-implicit Euler integration of a spring network with ground contact,
// optional node/ellipse and ellipse/ground contact, plus the exact adjoint of
// the whole rollout: a reverse sweep over stored states that yields the
// gradient of a scalar rollout loss with respect to every spring rest length,
// spring stiffness, actuation channel parameter, and node initial position.
//
// Contact forces are smooth penalties: quadratic penetration energy with
// velocity damping and a tangential friction force -mu*N*tanh(v_t/eps_v), so
// the loss stays differentiable wherever a contact is active.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "codesign/sim/model.hpp"
#include "codesign/space.hpp"

namespace codesign::sim {

struct State {
  std::vector<Vector2d> x;
  std::vector<Vector2d> v;
  bool has_ellipse = false;
  Vector2d e_center{0.0, 0.0};
  double e_angle = 0.0;
  Vector2d e_linvel{0.0, 0.0};
  double e_angvel = 0.0;

  bool finite() const {
    for (const auto& p : x)
      if (!p.allFinite()) return false;
    for (const auto& p : v)
      if (!p.allFinite()) return false;
    if (has_ellipse)
      return e_center.allFinite() && std::isfinite(e_angle) && e_linvel.allFinite() &&
             std::isfinite(e_angvel);
    return true;
  }
};

// Constant ellipse properties during a rollout.
struct EllipseShape {
  double a = 0.1;  // semi-major
  double b = 0.05; // semi-minor
  double mass = 0.1;
  double inertia = 1e-4;
};

inline State initial_state(const SpringNetwork& net, const std::optional<RigidEllipse>& ellipse) {
  State s;
  s.x.reserve(net.nodes.size());
  for (const Node& n : net.nodes) s.x.push_back(n.pos);
  s.v.assign(net.nodes.size(), Vector2d::Zero());
  if (ellipse) {
    s.has_ellipse = true;
    s.e_center = ellipse->center;
    s.e_angle = ellipse->angle;
    s.e_linvel = ellipse->lin_vel;
    s.e_angvel = ellipse->ang_vel;
  }
  return s;
}

inline EllipseShape shape_of(const RigidEllipse& e) {
  return EllipseShape{e.semi_major, e.semi_minor, e.mass, e.inertia};
}

struct Forces {
  std::vector<Vector2d> node;
  Vector2d ellipse_force{0.0, 0.0};
  double ellipse_torque = 0.0;
  // Filled only when requested; used by the action-reaction checks.
  std::vector<Vector2d> node_contact_from_ellipse;

  void reset(std::size_t n, bool breakdown) {
    node.assign(n, Vector2d::Zero());
    ellipse_force.setZero();
    ellipse_torque = 0.0;
    if (breakdown)
      node_contact_from_ellipse.assign(n, Vector2d::Zero());
    else
      node_contact_from_ellipse.clear();
  }
};

namespace detail {

constexpr double kLenEps2 = 1e-18;  // regularizes |d| at coincident nodes

inline Vector2d rot(double c, double s, const Vector2d& v) {
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}
inline Vector2d rot_t(double c, double s, const Vector2d& v) {
  return {c * v.x() + s * v.y(), -s * v.x() + c * v.y()};
}
// d/dtheta of rot(theta, v) and rot_t(theta, v)
inline Vector2d drot(double c, double s, const Vector2d& v) {
  return {-s * v.x() - c * v.y(), c * v.x() - s * v.y()};
}
inline Vector2d drot_t(double c, double s, const Vector2d& v) {
  return {-s * v.x() + c * v.y(), -c * v.x() - s * v.y()};
}
inline Vector2d perp(const Vector2d& v) { return {-v.y(), v.x()}; }
inline double cross2(const Vector2d& a, const Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace detail

inline void compute_forces(const State& s, const SpringNetwork& net, const Actuation& act,
                           const EllipseShape* ell, const SimConfig& cfg, double t, Forces& f,
                           bool breakdown = false) {
  using namespace detail;
  f.reset(net.nodes.size(), breakdown);

  for (const Spring& sp : net.springs) {
    const Vector2d d = s.x[sp.j] - s.x[sp.i];
    const double len = std::sqrt(d.squaredNorm() + kLenEps2);
    const Vector2d u = d / len;
    const double uch = act.value(sp.channel, t);
    const double reff = sp.rest * (1.0 + sp.weight * uch);
    const double srel = (s.v[sp.j] - s.v[sp.i]).dot(u);
    const double g = sp.stiffness * (len - reff) + cfg.spring_damping * srel;
    const Vector2d force = g * u;
    f.node[sp.i] += force;
    f.node[sp.j] -= force;
  }

  const double mu = cfg.tangential_friction;
  const double eps_v = cfg.friction_vel_eps;
  for (std::size_t n = 0; n < net.nodes.size(); ++n) {
    if (net.nodes[n].pinned) continue;
    const double pen = cfg.ground_height - s.x[n].y();
    if (pen <= 0.0) continue;
    const double n_raw = cfg.contact_stiffness * pen - cfg.contact_damping * s.v[n].y();
    if (n_raw <= 0.0) continue;
    const double fx = -mu * n_raw * std::tanh(s.v[n].x() / eps_v);
    f.node[n] += Vector2d(fx, n_raw);
  }

  if (s.has_ellipse && ell) {
    const double c = std::cos(s.e_angle), sn = std::sin(s.e_angle);
    const double a = ell->a, b = ell->b;
    const double bmin = std::min(a, b);

    for (std::size_t n = 0; n < net.nodes.size(); ++n) {
      const Vector2d r = s.x[n] - s.e_center;
      const Vector2d q = rot_t(c, sn, r);
      const double sx = q.x() / a, sy = q.y() / b;
      const double rho = std::sqrt(sx * sx + sy * sy + kLenEps2);
      const double pen = (1.0 - rho) * bmin;
      if (pen <= 0.0) continue;
      const Vector2d h(q.x() / (a * a), q.y() / (b * b));
      const double hn = std::sqrt(h.squaredNorm() + kLenEps2);
      const Vector2d ne = h / hn;
      const Vector2d nw = rot(c, sn, ne);
      const Vector2d tw = perp(nw);
      const Vector2d vp = s.e_linvel + s.e_angvel * perp(r);
      const Vector2d vrel = s.v[n] - vp;
      const double vn = vrel.dot(nw);
      const double vt = vrel.dot(tw);
      const double n_raw = cfg.ellipse_contact_stiffness * pen - cfg.ellipse_contact_damping * vn;
      if (n_raw <= 0.0) continue;
      const double ft = -mu * n_raw * std::tanh(vt / eps_v);
      const Vector2d force = n_raw * nw + ft * tw;
      f.node[n] += force;
      f.ellipse_force -= force;
      f.ellipse_torque += cross2(r, -force);
      if (breakdown) f.node_contact_from_ellipse[n] += force;
    }

    // ellipse resting on the ground: penalty at the support point
    {
      const double k2 = a * a * sn * sn + b * b * c * c;
      const double norm = std::sqrt(k2);
      const double pen = cfg.ground_height - s.e_center.y() + norm;
      if (pen > 0.0) {
        const Vector2d rvec(-(a * a - b * b) * sn * c / norm, -norm);
        const Vector2d vp = s.e_linvel + s.e_angvel * perp(rvec);
        const double n_raw = cfg.object_ground_stiffness * pen - cfg.object_ground_damping * vp.y();
        if (n_raw > 0.0) {
          const double fx = -mu * n_raw * std::tanh(vp.x() / eps_v);
          const Vector2d force(fx, n_raw);
          f.ellipse_force += force;
          f.ellipse_torque += cross2(rvec, force);
        }
      }
    }

    if (cfg.external_torque) f.ellipse_torque += cfg.external_torque->value(t);
  }
}

inline void integrate(State& s, const Forces& f, const SpringNetwork& net, const EllipseShape* ell,
                      const SimConfig& cfg) {
  for (std::size_t n = 0; n < net.nodes.size(); ++n) {
    if (net.nodes[n].pinned) {
      s.v[n].setZero();
      continue;
    }
    s.v[n] += cfg.dt * (f.node[n] / net.nodes[n].mass + cfg.gravity);
    s.x[n] += cfg.dt * s.v[n];
  }
  if (s.has_ellipse && ell) {
    s.e_linvel += cfg.dt * (f.ellipse_force / ell->mass + cfg.gravity);
    s.e_center += cfg.dt * s.e_linvel;
    s.e_angvel += cfg.dt * f.ellipse_torque / ell->inertia;
    s.e_angle += cfg.dt * s.e_angvel;
  }
}

// One semi-implicit Euler step at time t = step_index * dt.
inline void step(State& s, const SpringNetwork& net, const Actuation& act, const EllipseShape* ell,
                 const SimConfig& cfg, double t, Forces& scratch, int step_index = 0) {
  compute_forces(s, net, act, ell, cfg, t, scratch);
  integrate(s, scratch, net, ell, cfg);
  if (!s.finite()) throw SimulationDiverged(step_index);
}

// ---------------------------------------------------------------------------
// Rollout loss
// ---------------------------------------------------------------------------

struct LossSpec {
  enum class Kind {
    NegComDisplacementX,  // scale * (com_x(0) - com_x(T)); travel right = lower loss
    AngleError            // scale * |angle(T) - angle(0) - target|
  };
  Kind kind = Kind::NegComDisplacementX;
  double target = 0.0;  // rad, AngleError only
  double scale = 1.0;

  double eval(const State& s0, const State& sT) const {
    if (kind == Kind::NegComDisplacementX) {
      double c0 = 0.0, cT = 0.0;
      for (std::size_t n = 0; n < s0.x.size(); ++n) {
        c0 += s0.x[n].x();
        cT += sT.x[n].x();
      }
      const double inv = 1.0 / static_cast<double>(s0.x.size());
      return scale * (c0 - cT) * inv;
    }
    return scale * std::abs(sT.e_angle - s0.e_angle - target);
  }
};

struct RolloutResult {
  double loss = 0.0;
  Trajectory trajectory;
};

inline RolloutResult rollout(const SpringNetwork& net, const Actuation& act,
                             const std::optional<RigidEllipse>& ellipse, const SimConfig& cfg,
                             const LossSpec& loss) {
  cfg.validate();
  net.validate();
  std::optional<EllipseShape> shape;
  if (ellipse) {
    ellipse->validate();
    shape = shape_of(*ellipse);
  }
  State s = initial_state(net, ellipse);
  const State s0 = s;
  Forces scratch;

  RolloutResult out;
  out.trajectory.record_stride = cfg.record_stride;
  auto record = [&](const State& st) {
    out.trajectory.nodes.push_back(st.x);
    if (st.has_ellipse) out.trajectory.ellipse.push_back({st.e_center, st.e_angle});
  };
  record(s);
  for (int k = 0; k < cfg.steps; ++k) {
    step(s, net, act, shape ? &*shape : nullptr, cfg, k * cfg.dt, scratch, k);
    if ((k + 1) % cfg.record_stride == 0 || k + 1 == cfg.steps) record(s);
  }
  out.loss = loss.eval(s0, s);
  return out;
}

// ---------------------------------------------------------------------------
// Adjoint
// ---------------------------------------------------------------------------

// Gradients with respect to the exposed simulator parameters.
struct ParamGrad {
  Vec rest;                                  // per spring
  Vec stiffness;                             // per spring
  std::vector<std::vector<double>> channels; // per channel, per channel parameter
  std::vector<Vector2d> x0;                  // per node initial position

  double max_abs() const {
    double m = 0.0;
    for (Eigen::Index k = 0; k < rest.size(); ++k) m = std::max(m, std::abs(rest[k]));
    for (Eigen::Index k = 0; k < stiffness.size(); ++k) m = std::max(m, std::abs(stiffness[k]));
    for (const auto& ch : channels)
      for (double g : ch) m = std::max(m, std::abs(g));
    for (const auto& g : x0) m = std::max(m, g.cwiseAbs().maxCoeff());
    return m;
  }

  bool all_finite() const {
    if (!rest.allFinite() || !stiffness.allFinite()) return false;
    for (const auto& ch : channels)
      for (double g : ch)
        if (!std::isfinite(g)) return false;
    for (const auto& g : x0)
      if (!g.allFinite()) return false;
    return true;
  }
};

struct AdjointState {
  std::vector<Vector2d> xb, vb;
  Vector2d ecb{0.0, 0.0};
  double eab = 0.0;
  Vector2d evb{0.0, 0.0};
  double ewb = 0.0;
};

namespace detail {

// Reverse of one step. `pre` is the state the step started from, `adj` holds
// the adjoint of the post-step state on entry and of the pre-step state on
// exit. Parameter cotangents accumulate into `pg`.
inline void backward_step(const State& pre, const SpringNetwork& net, const Actuation& act,
                          const EllipseShape* ell, const SimConfig& cfg, double t,
                          AdjointState& adj, ParamGrad& pg) {
  const std::size_t nn = net.nodes.size();

  // integrate backward: cotangents on forces, plus state pass-through
  std::vector<Vector2d> fb(nn, Vector2d::Zero());
  for (std::size_t n = 0; n < nn; ++n) {
    if (net.nodes[n].pinned) {
      adj.vb[n].setZero();
      continue;
    }
    const Vector2d vb_tot = adj.vb[n] + cfg.dt * adj.xb[n];
    fb[n] = (cfg.dt / net.nodes[n].mass) * vb_tot;
    adj.vb[n] = vb_tot;  // xb unchanged: x' = x + dt v'
  }
  Vector2d feb = Vector2d::Zero();
  double taub = 0.0;
  if (pre.has_ellipse && ell) {
    const Vector2d evb_tot = adj.evb + cfg.dt * adj.ecb;
    feb = (cfg.dt / ell->mass) * evb_tot;
    adj.evb = evb_tot;
    const double ewb_tot = adj.ewb + cfg.dt * adj.eab;
    taub = (cfg.dt / ell->inertia) * ewb_tot;
    adj.ewb = ewb_tot;
  }

  // force pass backward: recompute intermediates from `pre`
  for (const Spring& sp : net.springs) {
    const Vector2d w = fb[sp.i] - fb[sp.j];
    // every cotangent below is linear in w
    if (w.x() == 0.0 && w.y() == 0.0) continue;
    const Vector2d d = pre.x[sp.j] - pre.x[sp.i];
    const double len = std::sqrt(d.squaredNorm() + kLenEps2);
    const Vector2d u = d / len;
    const double uch = act.value(sp.channel, t);
    const double reff = sp.rest * (1.0 + sp.weight * uch);
    const Vector2d vrel = pre.v[sp.j] - pre.v[sp.i];
    const double srel = vrel.dot(u);
    const double g = sp.stiffness * (len - reff) + cfg.spring_damping * srel;

    const double gb = w.dot(u);
    Vector2d ub = g * w;

    const std::ptrdiff_t si = &sp - net.springs.data();
    pg.stiffness[si] += (len - reff) * gb;
    const double extb = sp.stiffness * gb;
    const double srelb = cfg.spring_damping * gb;
    double lenb = extb;
    const double reffb = -extb;
    pg.rest[si] += reffb * (1.0 + sp.weight * uch);
    if (sp.channel >= 0) {
      const double uchb = reffb * sp.rest * sp.weight;
      act.channels[sp.channel].accumulate_value_grad(t, uchb,
                                                     pg.channels[sp.channel].data());
    }
    // srel = vrel . u
    adj.vb[sp.j] += srelb * u;
    adj.vb[sp.i] -= srelb * u;
    ub += srelb * vrel;
    // u = d / len
    Vector2d db = ub / len;
    lenb -= ub.dot(u) / len;
    // len = sqrt(|d|^2 + eps)
    db += (lenb / len) * d;
    adj.xb[sp.j] += db;
    adj.xb[sp.i] -= db;
  }

  const double mu = cfg.tangential_friction;
  const double eps_v = cfg.friction_vel_eps;
  for (std::size_t n = 0; n < nn; ++n) {
    if (net.nodes[n].pinned) continue;
    const double pen = cfg.ground_height - pre.x[n].y();
    if (pen <= 0.0) continue;
    const double n_raw = cfg.contact_stiffness * pen - cfg.contact_damping * pre.v[n].y();
    if (n_raw <= 0.0) continue;
    const double th = std::tanh(pre.v[n].x() / eps_v);
    const Vector2d w = fb[n];
    double nb = w.y() + w.x() * (-mu * th);
    adj.vb[n].x() += w.x() * (-mu * n_raw * (1.0 - th * th) / eps_v);
    adj.xb[n].y() += -cfg.contact_stiffness * nb;
    adj.vb[n].y() += -cfg.contact_damping * nb;
  }

  if (pre.has_ellipse && ell) {
    const double c = std::cos(pre.e_angle), sn = std::sin(pre.e_angle);
    const double a = ell->a, b = ell->b;
    const double bmin = std::min(a, b);

    for (std::size_t n = 0; n < nn; ++n) {
      const Vector2d r = pre.x[n] - pre.e_center;
      const Vector2d q = rot_t(c, sn, r);
      const double sx = q.x() / a, sy = q.y() / b;
      const double rho = std::sqrt(sx * sx + sy * sy + kLenEps2);
      const double pen = (1.0 - rho) * bmin;
      if (pen <= 0.0) continue;
      const Vector2d h(q.x() / (a * a), q.y() / (b * b));
      const double hn = std::sqrt(h.squaredNorm() + kLenEps2);
      const Vector2d ne = h / hn;
      const Vector2d nw = rot(c, sn, ne);
      const Vector2d tw = perp(nw);
      const Vector2d vp = pre.e_linvel + pre.e_angvel * perp(r);
      const Vector2d vrel = pre.v[n] - vp;
      const double vn = vrel.dot(nw);
      const double vt = vrel.dot(tw);
      const double n_raw = cfg.ellipse_contact_stiffness * pen - cfg.ellipse_contact_damping * vn;
      if (n_raw <= 0.0) continue;
      const double th = std::tanh(vt / eps_v);
      const double ft = -mu * n_raw * th;
      const Vector2d force = n_raw * nw + ft * tw;

      // force applied +F node, -F ellipse, torque += cross(r, -F)
      Vector2d Fw = fb[n] - feb + taub * (-perp(r));
      Vector2d rb = taub * Vector2d(-force.y(), force.x());

      double nb = Fw.dot(nw);
      Vector2d nwb = n_raw * Fw;
      const double ftb = Fw.dot(tw);
      Vector2d twb = ft * Fw;
      nb += ftb * (-mu * th);
      const double vtb = ftb * (-mu * n_raw * (1.0 - th * th) / eps_v);
      double penb = cfg.ellipse_contact_stiffness * nb;
      double vnb = -cfg.ellipse_contact_damping * nb;
      // vt = vrel . tw ; vn = vrel . nw
      Vector2d vrelb = vtb * tw + vnb * nw;
      twb += vtb * vrel;
      nwb += vnb * vrel;
      // tw = perp(nw)
      nwb += Vector2d(twb.y(), -twb.x());
      // vrel = v[n] - vp
      adj.vb[n] += vrelb;
      const Vector2d vpb = -vrelb;
      // vp = e_linvel + e_angvel * perp(r)
      adj.evb += vpb;
      adj.ewb += vpb.dot(perp(r));
      rb += pre.e_angvel * Vector2d(vpb.y(), -vpb.x());
      // nw = rot(theta) ne
      Vector2d neb = rot_t(c, sn, nwb);
      adj.eab += nwb.dot(drot(c, sn, ne));
      // ne = h / hn
      Vector2d hb = (neb - ne * ne.dot(neb)) / hn;
      // h = (qx/a^2, qy/b^2)
      Vector2d qb(hb.x() / (a * a), hb.y() / (b * b));
      // pen = (1 - rho) * bmin
      const double rhob = -bmin * penb;
      // rho = sqrt(sx^2 + sy^2 + eps)
      const double sxb = rhob * sx / rho, syb = rhob * sy / rho;
      qb += Vector2d(sxb / a, syb / b);
      // q = rot_t(theta) r
      rb += rot(c, sn, qb);
      adj.eab += qb.dot(drot_t(c, sn, r));
      // r = x[n] - e_center
      adj.xb[n] += rb;
      adj.ecb -= rb;
    }

    {
      const double k2 = a * a * sn * sn + b * b * c * c;
      const double norm = std::sqrt(k2);
      const double pen = cfg.ground_height - pre.e_center.y() + norm;
      if (pen > 0.0) {
        const Vector2d rvec(-(a * a - b * b) * sn * c / norm, -norm);
        const Vector2d vp = pre.e_linvel + pre.e_angvel * perp(rvec);
        const double n_raw = cfg.object_ground_stiffness * pen - cfg.object_ground_damping * vp.y();
        if (n_raw > 0.0) {
          const double th = std::tanh(vp.x() / eps_v);
          const double fx = -mu * n_raw * th;
          const Vector2d force(fx, n_raw);

          Vector2d Fw = feb + taub * perp(rvec);
          Vector2d rvecb = taub * Vector2d(force.y(), -force.x());
          const double fxb = Fw.x();
          double nb = Fw.y();
          nb += fxb * (-mu * th);
          const double vpxb = fxb * (-mu * n_raw * (1.0 - th * th) / eps_v);
          double penb = cfg.object_ground_stiffness * nb;
          const double vpyb = -cfg.object_ground_damping * nb;
          const Vector2d vpb(vpxb, vpyb);
          // vp = e_linvel + w * perp(rvec)
          adj.evb += vpb;
          adj.ewb += vpb.dot(perp(rvec));
          rvecb += pre.e_angvel * Vector2d(vpb.y(), -vpb.x());
          // pen = gh - ec.y + norm
          adj.ecb.y() -= penb;
          double normb = penb;
          // rvec = (-(a^2-b^2) s c / norm, -norm)
          normb += -rvecb.y();
          const double u = sn * c;
          const double du = c * c - sn * sn;
          const double dnorm = (a * a - b * b) * u / norm;
          const double drx = -(a * a - b * b) * (du * norm - u * dnorm) / k2;
          adj.eab += rvecb.x() * drx;
          adj.eab += normb * dnorm;
        }
      }
      // external torque has no state or parameter dependence
    }
  }
}

}  // namespace detail

struct RolloutGradResult {
  double loss = 0.0;
  ParamGrad grad;
  Trajectory trajectory;
};

// Full-trajectory reverse sweep with a stored state per step. Forward
// arithmetic is byte-identical to rollout(), so both report the same loss.
inline RolloutGradResult rollout_with_gradient(const SpringNetwork& net, const Actuation& act,
                                               const std::optional<RigidEllipse>& ellipse,
                                               const SimConfig& cfg, const LossSpec& loss) {
  cfg.validate();
  net.validate();
  std::optional<EllipseShape> shape;
  if (ellipse) {
    ellipse->validate();
    shape = shape_of(*ellipse);
  }
  const EllipseShape* ell = shape ? &*shape : nullptr;

  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  states.push_back(initial_state(net, ellipse));
  Forces scratch;
  RolloutGradResult out;
  out.trajectory.record_stride = cfg.record_stride;
  auto record = [&](const State& st) {
    out.trajectory.nodes.push_back(st.x);
    if (st.has_ellipse) out.trajectory.ellipse.push_back({st.e_center, st.e_angle});
  };
  record(states.front());
  for (int k = 0; k < cfg.steps; ++k) {
    State s = states.back();
    step(s, net, act, ell, cfg, k * cfg.dt, scratch, k);
    if ((k + 1) % cfg.record_stride == 0 || k + 1 == cfg.steps) record(s);
    states.push_back(std::move(s));
  }
  const State& s0 = states.front();
  const State& sT = states.back();
  out.loss = loss.eval(s0, sT);

  const std::size_t nn = net.nodes.size();
  ParamGrad& pg = out.grad;
  pg.rest = Vec::Zero(static_cast<Eigen::Index>(net.springs.size()));
  pg.stiffness = Vec::Zero(static_cast<Eigen::Index>(net.springs.size()));
  pg.channels.resize(act.channels.size());
  for (std::size_t ch = 0; ch < act.channels.size(); ++ch)
    pg.channels[ch].assign(act.channels[ch].params.size(), 0.0);
  pg.x0.assign(nn, Vector2d::Zero());

  AdjointState adj;
  adj.xb.assign(nn, Vector2d::Zero());
  adj.vb.assign(nn, Vector2d::Zero());

  if (loss.kind == LossSpec::Kind::NegComDisplacementX) {
    const double seed = -loss.scale / static_cast<double>(nn);
    for (std::size_t n = 0; n < nn; ++n) adj.xb[n].x() = seed;
  } else {
    adj.eab = loss.scale * ((sT.e_angle - s0.e_angle - loss.target) >= 0.0 ? 1.0 : -1.0);
  }

  for (int k = cfg.steps - 1; k >= 0; --k)
    detail::backward_step(states[static_cast<std::size_t>(k)], net, act, ell, cfg, k * cfg.dt, adj,
                          pg);

  for (std::size_t n = 0; n < nn; ++n) pg.x0[n] = adj.xb[n];
  if (loss.kind == LossSpec::Kind::NegComDisplacementX) {
    const double seed = loss.scale / static_cast<double>(nn);
    for (std::size_t n = 0; n < nn; ++n) pg.x0[n].x() += seed;
  }

  if (!pg.all_finite() || pg.max_abs() > 1e12) throw GradientOverflow();
  return out;
}

}  // namespace codesign::sim
