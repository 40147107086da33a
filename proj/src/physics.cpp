// Copyright 2026 The impactlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "impactlab/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace impactlab {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

double semi_disc_com_distance(double radius) { return 4.0 * radius / (3.0 * kPi); }

}  // namespace

std::string_view shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kSemiDisc: return "semidisc";
    case ShapeKind::kSquare: return "square";
    case ShapeKind::kTriangle: return "triangle";
  }
  return "unknown";
}

std::optional<ShapeKind> parse_shape_kind(std::string_view name) {
  if (name == "semidisc" || name == "semi-disc" || name == "semicylinder") {
    return ShapeKind::kSemiDisc;
  }
  if (name == "square") return ShapeKind::kSquare;
  if (name == "triangle") return ShapeKind::kTriangle;
  return std::nullopt;
}

ShapeSpec ShapeSpec::make(ShapeKind kind, double size, double mass) {
  if (!(size > 0.0) || !std::isfinite(size)) {
    fail(ErrorCode::kInvalidArgument, "shape size must be positive");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    fail(ErrorCode::kInvalidArgument, "shape mass must be positive");
  }
  return ShapeSpec{kind, size, mass};
}

double ShapeSpec::inertia() const {
  switch (kind) {
    case ShapeKind::kSemiDisc: {
      // m R^2 / 2 about the circle centre, shifted to the centre of mass.
      const double d = semi_disc_com_distance(size);
      return mass * (0.5 * size * size - d * d);
    }
    case ShapeKind::kSquare:
      return mass * size * size / 6.0;
    case ShapeKind::kTriangle:
      return mass * size * size / 12.0;
  }
  return 0.0;
}

double ShapeSpec::gyration_radius() const { return std::sqrt(inertia() / mass); }

int ShapeSpec::symmetry_order() const {
  switch (kind) {
    case ShapeKind::kSemiDisc: return 1;
    case ShapeKind::kSquare: return 4;
    case ShapeKind::kTriangle: return 3;
  }
  return 1;
}

Vec2 ShapeSpec::com_offset() const {
  if (kind == ShapeKind::kSemiDisc) return {0.0, semi_disc_com_distance(size)};
  return Vec2::Zero();
}

std::vector<Vec2> ShapeSpec::vertices() const {
  const double h = 0.5 * size;
  switch (kind) {
    case ShapeKind::kSquare:
      return {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
    case ShapeKind::kTriangle: {
      const double height = 0.5 * kSqrt3 * size;
      return {{0.0, -2.0 * height / 3.0}, {h, height / 3.0}, {-h, height / 3.0}};
    }
    case ShapeKind::kSemiDisc:
      break;
  }
  return {};
}

ShapeSpec default_shape(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kSemiDisc: return ShapeSpec{kind, 0.05, 0.5};
    case ShapeKind::kSquare: return ShapeSpec{kind, 0.08, 0.5};
    case ShapeKind::kTriangle: return ShapeSpec{kind, 0.10, 0.5};
  }
  return ShapeSpec{};
}

bool BodyState::finite() const {
  return pos.allFinite() && std::isfinite(heading) && lin_vel.allFinite() &&
         std::isfinite(ang_vel);
}

Vec2 BodyState::com(const ShapeSpec& shape) const {
  return pos + rotate(shape.com_offset(), heading);
}

bool ParamBox::contains(const ContactParams& p) const {
  const auto a = p.to_array();
  for (int i = 0; i < 4; ++i) {
    if (!(a[i] >= lo[i] && a[i] <= hi[i])) return false;
  }
  return true;
}

ParamBox ParamBox::shrunk(double fraction) const {
  ParamBox out = *this;
  for (int i = 0; i < 4; ++i) {
    const double pad = fraction * (hi[i] - lo[i]);
    out.lo[i] += pad;
    out.hi[i] -= pad;
  }
  return out;
}

ParamBox param_box() { return {{0.05, 0.02, 0.1, 0.1}, {1.0, 1.0, 3.0, 3.0}}; }

bool SpecBox::contains(const ImpactSpec& s) const {
  const auto a = s.to_array();
  for (int i = 0; i < 3; ++i) {
    if (!(a[i] >= lo[i] && a[i] <= hi[i])) return false;
  }
  return true;
}

SpecBox SpecBox::shrunk(double fraction) const {
  SpecBox out = *this;
  for (int i = 0; i < 3; ++i) {
    const double pad = fraction * (hi[i] - lo[i]);
    out.lo[i] += pad;
    out.hi[i] -= pad;
  }
  return out;
}

SpecBox spec_box(ShapeKind kind) {
  // Polygons use the same 1/12 .. 11/12 fraction of the struck face that the
  // arc range covers on the semi-disc.
  if (kind == ShapeKind::kSemiDisc) {
    return {{0.2, kPi / 12.0, -kPi / 12.0}, {0.8, 11.0 * kPi / 12.0, kPi / 12.0}};
  }
  return {{0.2, 1.0 / 12.0, -kPi / 12.0}, {0.8, 11.0 / 12.0, kPi / 12.0}};
}

bool PostImpact::finite() const {
  return std::isfinite(vn) && std::isfinite(vt) && std::isfinite(omega);
}

RealityConfig RealityConfig::ideal(const ContactParams& p) {
  RealityConfig r;
  r.hidden_params = p;
  r.restitution_velocity_coeff = 0.0;
  r.slide_spin_coupling = 0.0;
  r.contact_jitter_sigma = 0.0;
  return r;
}

void RealityConfig::validate() const {
  if (!(restitution_velocity_coeff >= 0.0)) {
    fail(ErrorCode::kConfig, "restitution_velocity_coeff must be >= 0");
  }
  if (!(slide_spin_coupling >= 0.0 && slide_spin_coupling <= 1.0)) {
    fail(ErrorCode::kConfig, "slide_spin_coupling must lie in [0, 1]");
  }
  if (!(contact_jitter_sigma >= 0.0)) {
    fail(ErrorCode::kConfig, "contact_jitter_sigma must be >= 0");
  }
}

double damping_to_restitution(double d) {
  if (d >= 1.0) return 0.0;
  if (d <= 0.0) return 1.0;
  return std::exp(-kPi * d / std::sqrt(1.0 - d * d));
}

double restitution_to_damping(double e) {
  if (e <= 0.0) return 1.0;
  if (e >= 1.0) return 0.0;
  const double l = std::log(e);
  return -l / std::sqrt(kPi * kPi + l * l);
}

BodyContact contact_on_boundary(const ShapeSpec& shape, double point_param) {
  if (!std::isfinite(point_param)) fail(ErrorCode::kNoContact, "non-finite point_param");
  if (shape.kind == ShapeKind::kSemiDisc) {
    if (point_param < 0.0 || point_param > kPi) {
      std::ostringstream msg;
      msg << "point_param " << point_param << " is off the strikeable arc [0, pi]";
      fail(ErrorCode::kNoContact, msg.str());
    }
    const Vec2 dir(std::cos(point_param), std::sin(point_param));
    return {shape.size * dir, -dir};
  }
  if (point_param < 0.0 || point_param > 1.0) {
    std::ostringstream msg;
    msg << "point_param " << point_param << " is off the strikeable face [0, 1]";
    fail(ErrorCode::kNoContact, msg.str());
  }
  const auto v = shape.vertices();
  // The struck face is the top one; it runs from +x to -x as the parameter grows.
  const double face_y = v.back().y();
  return {{(0.5 - point_param) * shape.size, face_y}, {0.0, -1.0}};
}

WorldImpact impact_spec_to_world(const ShapeSpec& shape, const BodyState& pose,
                                 const ImpactSpec& spec) {
  const BodyContact c = contact_on_boundary(shape, spec.point_param);
  WorldImpact w;
  w.contact_point = pose.pos + rotate(c.point, pose.heading);
  w.contact_normal = rotate(c.normal, pose.heading);
  w.impactor_velocity = spec.speed * rotate(w.contact_normal, spec.deflection);
  return w;
}

namespace {

struct Closest {
  Vec2 point;
  Vec2 outward;  // unit normal from the boundary toward the query point
  double distance;  // signed, negative inside
};

Closest closest_semi_disc(double radius, const Vec2& q) {
  const double r = q.norm();
  if (q.y() >= 0.0) {
    if (r >= radius) {
      const Vec2 dir = q / r;
      return {radius * dir, dir, r - radius};
    }
    const double to_arc = radius - r;
    const double to_flat = q.y();
    if (to_arc < to_flat && r > 0.0) {
      const Vec2 dir = q / r;
      return {radius * dir, dir, -to_arc};
    }
    return {{q.x(), 0.0}, {0.0, -1.0}, -to_flat};
  }
  const Vec2 p(std::clamp(q.x(), -radius, radius), 0.0);
  const Vec2 diff = q - p;
  const double dist = diff.norm();
  if (dist > 0.0) return {p, diff / dist, dist};
  return {p, {0.0, -1.0}, 0.0};
}

Closest closest_polygon(const std::vector<Vec2>& verts, const Vec2& q) {
  const std::size_t n = verts.size();
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point = verts[0];
  Vec2 best_edge_normal(0.0, 1.0);
  bool inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = verts[i];
    const Vec2& b = verts[(i + 1) % n];
    const Vec2 ab = b - a;
    if (cross(ab, q - a) < 0.0) inside = false;
    const double t = std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Vec2 p = a + t * ab;
    const double d2 = (q - p).squaredNorm();
    if (d2 < best) {
      best = d2;
      best_point = p;
      best_edge_normal = Vec2(ab.y(), -ab.x()).normalized();
    }
  }
  const double dist = std::sqrt(best);
  Vec2 outward = best_edge_normal;
  if (dist > 1e-14) outward = (q - best_point) / dist * (inside ? -1.0 : 1.0);
  return {best_point, outward, inside ? -dist : dist};
}

class TargetGeometry {
 public:
  explicit TargetGeometry(const ShapeSpec& shape) : shape_(shape) {
    if (shape.kind != ShapeKind::kSemiDisc) verts_ = shape.vertices();
  }
  Closest closest(const Vec2& q) const {
    if (shape_.kind == ShapeKind::kSemiDisc) return closest_semi_disc(shape_.size, q);
    return closest_polygon(verts_, q);
  }

 private:
  ShapeSpec shape_;
  std::vector<Vec2> verts_;
};

void check_spec(const ImpactSpec& spec) {
  if (!std::isfinite(spec.speed) || !(spec.speed > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "impact speed must be positive and finite");
  }
  if (!std::isfinite(spec.deflection) || std::abs(spec.deflection) >= 0.5 * kPi) {
    fail(ErrorCode::kNoContact, "deflection must point into the target");
  }
}

}  // namespace

PostImpact solve_impact_full(const ShapeSpec& shape, const ImpactorSpec& impactor,
                             const ImpactSpec& spec, const ContactParams& params,
                             const SolverSettings& settings, ImpactDiagnostics* diag) {
  check_spec(spec);
  const BodyContact nominal = contact_on_boundary(shape, spec.point_param);
  const TargetGeometry geometry(shape);

  const double m = shape.mass;
  const double inertia = shape.inertia();
  const double inv_m = 1.0 / m;
  const double inv_inertia = 1.0 / inertia;
  const double inv_mi = impactor.commanded ? 0.0 : 1.0 / impactor.mass;
  const double dt = settings.dt_micro;
  const double g = settings.gravity;
  const Vec2 com_offset = shape.com_offset();
  const double r_g = shape.gyration_radius();

  // Normal stiffness sized for the penetration budget at the design speed.
  const double reduced_mass = 1.0 / (inv_mi + inv_m);
  const double stiffness = reduced_mass * std::pow(
      settings.design_speed / (0.95 * settings.max_penetration), 2);
  const Vec2 lever0 = nominal.point - com_offset;
  const double arm0 = cross(lever0, nominal.normal);
  const double normal_mass = 1.0 / (inv_mi + inv_m + arm0 * arm0 * inv_inertia);
  const double contact_damping = 2.0 * std::max(0.0, params.e1) *
                                 std::sqrt(stiffness * normal_mass);

  const double ground_k = m * settings.ground_frequency * settings.ground_frequency;
  const double ground_c = 2.0 * std::max(0.0, params.e2) * m * settings.ground_frequency;

  // Target state; world frame coincides with the body frame at t = 0.
  Vec2 com = com_offset;
  double heading = 0.0;
  Vec2 vel = Vec2::Zero();
  double omega = 0.0;
  double z = -m * g / ground_k;
  double zdot = 0.0;

  // Impactor starts half a step short of the nominal contact point so first
  // contact never sits on a rounding boundary.
  Vec2 imp_vel = spec.speed * rotate(nominal.normal, spec.deflection);
  Vec2 imp_pos = nominal.point - impactor.radius * nominal.normal - 0.5 * dt * imp_vel;
  const double release_floor = settings.release_load * m * g / stiffness;

  bool touched = false;
  bool compressed = false;  // approach has reached zero at least once
  bool retracted = false;
  ImpactDiagnostics d;

  int step = 0;
  for (; step < settings.max_micro_steps; ++step) {
    if (step >= settings.min_window_steps && retracted) break;

    Vec2 force = Vec2::Zero();
    double torque = 0.0;
    double f_down = 0.0;
    if (!retracted) {
      const Vec2 ref = com - rotate(com_offset, heading);
      const Vec2 q = rotate(imp_pos - ref, -heading);
      const Closest cl = geometry.closest(q);
      const Vec2 n = -rotate(cl.outward, heading);  // into the target
      const Vec2 t = perp(n);
      const Vec2 point = ref + rotate(cl.point, heading);
      const Vec2 lever = point - com;
      const Vec2 v_point = vel + omega * perp(lever);
      const Vec2 v_rel = imp_vel - v_point;
      const double approach = v_rel.dot(n);

      // Penetration at both ends of the step. Entry and exit are resolved to a
      // fraction of the step so the transferred impulse varies continuously
      // with the strike.
      const double pen0 = impactor.radius - cl.distance;
      const double pen1 = pen0 + approach * dt;
      const double exit_level =
          compressed ? std::min(release_floor, 0.25 * d.max_penetration) : 0.0;
      double active = 0.0;
      double pen_eval = pen0;
      bool exiting = false;
      if (!touched) {
        if (pen0 > 0.0) {
          active = 1.0;
        } else if (pen1 > 0.0) {
          active = pen1 / (pen1 - pen0);
          pen_eval = 0.5 * pen1;
        }
      } else if (pen0 > exit_level && pen1 >= exit_level) {
        active = 1.0;
      } else if (pen0 > exit_level) {
        active = (pen0 - exit_level) / (pen0 - pen1);
        pen_eval = 0.5 * (pen0 + exit_level);
        exiting = true;
      } else {
        retracted = true;
      }

      if (active > 0.0) {
        touched = true;
        ++d.contact_steps;
        d.max_penetration = std::max(d.max_penetration, pen0);
        const double h = active * dt;
        // Kelvin-Voigt normal law. The tensile tail is kept: it is what makes
        // the rebound follow the damping-ratio restitution map.
        const double fn = stiffness * pen_eval + contact_damping * approach;
        const double arm_t = cross(lever, t);
        const double w_t = inv_mi + inv_m + arm_t * arm_t * inv_inertia;
        const double limit = params.mu1 * std::max(fn, 0.0);
        const double ft = std::clamp(v_rel.dot(t) / (h * w_t), -limit, limit);
        d.max_cone_violation = std::max(d.max_cone_violation, std::abs(ft) - limit);
        d.normal_impulse += fn * h;
        d.tangential_impulse += ft * h;
        // Step-averaged force.
        force = active * (fn * n + ft * t);
        torque = cross(lever, force);
        f_down = settings.strike_pitch * active * std::max(fn, 0.0);
        if (approach <= 0.0) compressed = true;
        if (exiting) retracted = true;
      }
    }

    vel += force * (inv_m * dt);
    omega += torque * inv_inertia * dt;
    const double normal_load = std::max(0.0, -ground_k * z - ground_c * zdot);
    zdot += (normal_load - m * g - f_down) * inv_m * dt;
    if (!impactor.commanded) imp_vel -= force * (inv_mi * dt);

    // Ground friction as a bounded velocity-level impulse.
    const double lin_budget = params.mu2 * normal_load * dt * inv_m;
    const double speed = vel.norm();
    if (speed <= lin_budget) {
      vel.setZero();
    } else {
      vel *= (speed - lin_budget) / speed;
    }
    const double ang_budget =
        params.mu2 * normal_load * settings.torsion_coeff * r_g * dt * inv_inertia;
    if (std::abs(omega) <= ang_budget) {
      omega = 0.0;
    } else {
      omega -= std::copysign(ang_budget, omega);
    }

    com += vel * dt;
    heading += omega * dt;
    z += zdot * dt;
    imp_pos += imp_vel * dt;
  }
  d.micro_steps = step;
  if (diag != nullptr) *diag = d;

  if (step >= settings.max_micro_steps) {
    std::ostringstream msg;
    msg << "collision did not separate within " << settings.max_micro_steps
        << " micro-steps";
    fail(ErrorCode::kNonConvergence, msg.str());
  }
  const Vec2 t0 = perp(nominal.normal);
  PostImpact post{vel.dot(nominal.normal), vel.dot(t0), omega};
  if (!post.finite()) fail(ErrorCode::kNumeric, "non-finite post-impact state");
  return post;
}

double elastic_energy_bound(const ShapeSpec& shape, const ImpactorSpec& impactor,
                            double speed) {
  const double m = shape.mass;
  if (impactor.commanded) return 0.5 * m * (2.0 * speed) * (2.0 * speed);
  const double v = 2.0 * impactor.mass / (impactor.mass + m) * speed;
  return 0.5 * m * v * v;
}

double kinetic_energy(const ShapeSpec& shape, const PostImpact& post) {
  return 0.5 * shape.mass * (post.vn * post.vn + post.vt * post.vt) +
         0.5 * shape.inertia() * post.omega * post.omega;
}

BodyState apply_post_impact(const ShapeSpec& shape, const BodyState& pose,
                            const ImpactSpec& spec, const PostImpact& post) {
  const BodyContact c = contact_on_boundary(shape, spec.point_param);
  BodyState s = pose;
  s.lin_vel = rotate(post.vn * c.normal + post.vt * perp(c.normal), pose.heading);
  s.ang_vel = post.omega;
  return s;
}

double Trajectory::duration() const {
  return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1);
}

bool Trajectory::at_rest() const {
  return !samples.empty() && samples.back().lin_vel.isZero(0.0) &&
         samples.back().ang_vel == 0.0;
}

namespace {

// Exact integration of a constant deceleration over one step, stopping at
// zero. Returns the distance covered.
double decelerate(double& speed, double decel, double dt) {
  if (speed <= 0.0) return 0.0;
  if (speed <= decel * dt) {
    const double dist = speed * speed / (2.0 * decel);
    speed = 0.0;
    return dist;
  }
  const double dist = speed * dt - 0.5 * decel * dt * dt;
  speed -= decel * dt;
  return dist;
}

template <class Sink>
BodyState slide_impl(const ShapeSpec& shape, const BodyState& start, double mu2,
                     double horizon, const SlideSettings& cfg, Sink&& sink) {
  const Vec2 offset = shape.com_offset();
  const double r_g = shape.gyration_radius();
  const double lin_decel = mu2 * cfg.gravity;
  const double spin_decel = mu2 * cfg.gravity * cfg.torsion_coeff / r_g;

  Vec2 com = start.com(shape);
  double heading = start.heading;
  Vec2 vel = start.lin_vel;
  double omega = start.ang_vel;

  auto state = [&] {
    BodyState s;
    s.heading = wrap_angle(heading);
    s.pos = com - rotate(offset, heading);
    s.lin_vel = vel;
    s.ang_vel = omega;
    return s;
  };
  auto resting = [&] { return vel.norm() < cfg.rest_lin && std::abs(omega) < cfg.rest_ang; };

  if (resting()) {
    vel.setZero();
    omega = 0.0;
    BodyState s = state();
    sink(s);
    return s;
  }
  sink(state());
  const long max_steps = static_cast<long>(std::ceil(horizon / cfg.dt - 1e-9));
  for (long k = 0; k < max_steps; ++k) {
    double speed = vel.norm();
    const double speed0 = speed;
    if (speed > 0.0) {
      const Vec2 dir = vel / speed;
      com += dir * decelerate(speed, lin_decel, cfg.dt);
      vel = dir * speed;
    }
    double alpha = spin_decel;
    if (cfg.spin_coupling > 0.0 && omega != 0.0) {
      const double spin = r_g * std::abs(omega);
      const double share = spin / std::hypot(speed0, spin);
      alpha *= (1.0 - cfg.spin_coupling) + cfg.spin_coupling * share;
    }
    double spin_rate = std::abs(omega);
    const double sign = omega < 0.0 ? -1.0 : 1.0;
    heading += sign * decelerate(spin_rate, alpha, cfg.dt);
    omega = sign * spin_rate;
    if (resting()) {
      vel.setZero();
      omega = 0.0;
      BodyState s = state();
      sink(s);
      return s;
    }
    sink(state());
  }
  return state();
}

}  // namespace

Trajectory slide_to_rest(const ShapeSpec& shape, const BodyState& start,
                         const ContactParams& params, double horizon,
                         const SlideSettings& settings) {
  if (!start.finite()) fail(ErrorCode::kInvalidArgument, "non-finite start state");
  if (!(horizon > 0.0)) fail(ErrorCode::kInvalidArgument, "horizon must be positive");
  Trajectory traj;
  traj.dt = settings.dt;
  slide_impl(shape, start, params.mu2, horizon, settings,
             [&](const BodyState& s) { traj.samples.push_back(s); });
  return traj;
}

BodyState slide_final(const ShapeSpec& shape, const BodyState& start,
                      const ContactParams& params, double horizon,
                      const SlideSettings& settings) {
  if (!start.finite()) fail(ErrorCode::kInvalidArgument, "non-finite start state");
  if (!(horizon > 0.0)) fail(ErrorCode::kInvalidArgument, "horizon must be positive");
  return slide_impl(shape, start, params.mu2, horizon, settings, [](const BodyState&) {});
}

ImpactSpec reality_jittered_spec(const RealityConfig& reality, const ShapeSpec& shape,
                                 const ImpactSpec& spec) {
  if (reality.contact_jitter_sigma <= 0.0) return spec;
  std::mt19937_64 rng(hash_doubles(reality.seed,
                                   {spec.speed, spec.point_param, spec.deflection}));
  std::normal_distribution<double> noise(0.0, reality.contact_jitter_sigma);
  const double shift = noise(rng);  // metres along the struck boundary
  ImpactSpec out = spec;
  if (shape.kind == ShapeKind::kSemiDisc) {
    out.point_param = std::clamp(spec.point_param + shift / shape.size, 0.0, kPi);
  } else {
    out.point_param = std::clamp(spec.point_param + shift / shape.size, 0.0, 1.0);
  }
  return out;
}

PostImpact real_observe_impact(const RealityConfig& reality, const ShapeSpec& shape,
                               const ImpactorSpec& impactor, const ImpactSpec& spec,
                               const SolverSettings& settings) {
  check_spec(spec);
  contact_on_boundary(shape, spec.point_param);
  ContactParams p = reality.hidden_params;
  if (reality.restitution_velocity_coeff > 0.0) {
    const double base = damping_to_restitution(p.e1);
    if (base > 0.0) {
      const double approach = spec.speed * std::cos(spec.deflection);
      const double scaled =
          base * std::max(0.0, 1.0 - reality.restitution_velocity_coeff * approach);
      p.e1 = restitution_to_damping(scaled);
    }
  }
  return solve_impact_full(shape, impactor, reality_jittered_spec(reality, shape, spec),
                           p, settings);
}

SlideSettings reality_slide_settings(const RealityConfig& reality,
                                     const SlideSettings& base) {
  SlideSettings s = base;
  s.spin_coupling = reality.slide_spin_coupling;
  return s;
}

Trajectory real_observe_slide(const RealityConfig& reality, const ShapeSpec& shape,
                              const BodyState& start, double horizon,
                              const SlideSettings& settings) {
  return slide_to_rest(shape, start, reality.hidden_params, horizon,
                       reality_slide_settings(reality, settings));
}

}  // namespace impactlab
