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

// Planar tabletop world: a single target block struck by an arm-held disc.
//
// The body frame of every shape has its struck face on the +y side, so a
// strike through the centre pushes the block toward -y. BodyState::pos is the
// shape's reference point (centre of the circle for the semi-disc, centroid
// for the polygons); lin_vel is the velocity of the centre of mass.
//
// Post-impact twists are reported in the impact frame: x along the inward
// contact normal of the nominal contact point, y = x rotated by +90 degrees.

#ifndef IMPACTLAB_PHYSICS_HPP_
#define IMPACTLAB_PHYSICS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "impactlab/common.hpp"

namespace impactlab {

enum class ShapeKind { kSemiDisc, kSquare, kTriangle };

std::string_view shape_name(ShapeKind kind);
std::optional<ShapeKind> parse_shape_kind(std::string_view name);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::kSemiDisc;
  double size = 0.05;  // radius (semi-disc) or side length
  double mass = 0.5;

  // Throws kInvalidArgument for non-positive size or mass.
  static ShapeSpec make(ShapeKind kind, double size, double mass);

  double gyration_radius() const;
  double inertia() const;  // about the centre of mass
  int symmetry_order() const;
  // Centre of mass relative to the reference point, body frame.
  Vec2 com_offset() const;
  // Body-frame vertices of the polygon shapes, counter-clockwise.
  std::vector<Vec2> vertices() const;
};

ShapeSpec default_shape(ShapeKind kind);

struct BodyState {
  Vec2 pos = Vec2::Zero();
  double heading = 0.0;
  Vec2 lin_vel = Vec2::Zero();
  double ang_vel = 0.0;

  bool finite() const;
  Vec2 com(const ShapeSpec& shape) const;
};

struct ContactParams {
  double mu1 = 0.5;
  double mu2 = 0.5;
  double e1 = 0.5;
  double e2 = 0.5;

  std::array<double, 4> to_array() const { return {mu1, mu2, e1, e2}; }
  static ContactParams from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
  bool operator==(const ContactParams&) const = default;
};

// Axis-aligned sampling/validity box over (mu1, mu2, e1, e2).
struct ParamBox {
  std::array<double, 4> lo;
  std::array<double, 4> hi;
  bool contains(const ContactParams& p) const;
  ParamBox shrunk(double fraction) const;
};
ParamBox param_box();

struct ImpactSpec {
  double speed = 0.5;        // m/s
  double point_param = 0.0;  // arc angle (semi-disc) or face fraction
  double deflection = 0.0;   // velocity angle off the inward normal, rad

  std::array<double, 3> to_array() const { return {speed, point_param, deflection}; }
  static ImpactSpec from_array(const std::array<double, 3>& a) {
    return {a[0], a[1], a[2]};
  }
  bool operator==(const ImpactSpec&) const = default;
};

// Box over (speed, point_param, deflection).
struct SpecBox {
  std::array<double, 3> lo;
  std::array<double, 3> hi;
  bool contains(const ImpactSpec& s) const;
  SpecBox shrunk(double fraction) const;
};
SpecBox spec_box(ShapeKind kind);

struct PostImpact {
  double vn = 0.0;     // along the inward normal
  double vt = 0.0;     // along the normal rotated +90 degrees
  double omega = 0.0;  // rad/s

  bool finite() const;
  std::array<double, 3> to_array() const { return {vn, vt, omega}; }
  static PostImpact from_array(const std::array<double, 3>& a) {
    return {a[0], a[1], a[2]};
  }
  bool operator==(const PostImpact&) const = default;
};

struct ImpactorSpec {
  double mass = 2.0;
  double radius = 0.02;
  bool commanded = false;  // infinite effective mass, velocity prescribed
};

struct RealityConfig {
  ContactParams hidden_params{0.3, 0.25, 0.35, 0.6};
  double restitution_velocity_coeff = 0.3;  // s/m
  double slide_spin_coupling = 0.4;
  double contact_jitter_sigma = 5e-4;  // m
  std::uint64_t seed = 0;

  // Noise-free, perfectly modelled reality.
  static RealityConfig ideal(const ContactParams& p);
  void validate() const;
};

struct SolverSettings {
  double gravity = 9.81;
  double dt_micro = 1e-5;
  int max_micro_steps = 20000;
  // The event covers the contact plus the ground-reaction transient it
  // excites; the twist is read after at least this many micro-steps.
  int min_window_steps = 1000;
  double max_penetration = 1e-4;  // at design_speed
  double design_speed = 0.8;
  double ground_frequency = 2000.0;  // rad/s, vertical ground compliance
  double strike_pitch = 0.2;         // downward force per unit normal force
  double torsion_coeff = 0.5;
  // The arm retracts the impactor on separation, or once the contact has
  // relaxed past maximum compression to release_load * m g / k of
  // penetration, which ends overdamped pushes that would never separate.
  double release_load = 2.0;  // in target weights
};

struct ImpactDiagnostics {
  int micro_steps = 0;
  int contact_steps = 0;
  double max_penetration = 0.0;
  double normal_impulse = 0.0;
  double tangential_impulse = 0.0;
  // max over steps of |F_t| - mu1 * max(F_n, 0); <= 0 inside the cone.
  double max_cone_violation = 0.0;
};

// Restitution of a linear spring-damper contact with damping ratio d:
// exp(-pi d / sqrt(1 - d^2)) for d < 1, else 0.
double damping_to_restitution(double d);
// Inverse on (0, 1]; returns 1 for e <= 0.
double restitution_to_damping(double e);

// Nominal contact point and inward normal in the body frame.
struct BodyContact {
  Vec2 point;
  Vec2 normal;
};
BodyContact contact_on_boundary(const ShapeSpec& shape, double point_param);

struct WorldImpact {
  Vec2 contact_point;
  Vec2 contact_normal;      // unit, pointing into the target
  Vec2 impactor_velocity;
};
WorldImpact impact_spec_to_world(const ShapeSpec& shape, const BodyState& pose,
                                 const ImpactSpec& spec);

// Micro-stepped compliant collision of the impactor with a resting target.
PostImpact solve_impact_full(const ShapeSpec& shape, const ImpactorSpec& impactor,
                             const ImpactSpec& spec, const ContactParams& params,
                             const SolverSettings& settings = {},
                             ImpactDiagnostics* diag = nullptr);

// Upper bound on the target's kinetic energy for a strike of this speed:
// frictionless, perfectly elastic, through the centre of mass.
double elastic_energy_bound(const ShapeSpec& shape, const ImpactorSpec& impactor,
                            double speed);
double kinetic_energy(const ShapeSpec& shape, const PostImpact& post);

// Sets the target moving: post-impact twist mapped to world velocities at pose.
BodyState apply_post_impact(const ShapeSpec& shape, const BodyState& pose,
                            const ImpactSpec& spec, const PostImpact& post);

struct SlideSettings {
  double gravity = 9.81;
  double dt = 1e-3;
  double rest_lin = 1e-3;  // m/s
  double rest_ang = 1e-2;  // rad/s
  double torsion_coeff = 0.5;
  // 0 = decoupled Coulomb decay; > 0 slows spin decay while translating.
  double spin_coupling = 0.0;
};

struct Trajectory {
  double dt = 1e-3;
  std::vector<BodyState> samples;

  double duration() const;
  bool at_rest() const;
  const BodyState& back() const { return samples.back(); }
};

Trajectory slide_to_rest(const ShapeSpec& shape, const BodyState& start,
                         const ContactParams& params, double horizon,
                         const SlideSettings& settings = {});

// Final state of slide_to_rest without recording samples.
BodyState slide_final(const ShapeSpec& shape, const BodyState& start,
                      const ContactParams& params, double horizon,
                      const SlideSettings& settings = {});

PostImpact real_observe_impact(const RealityConfig& reality, const ShapeSpec& shape,
                               const ImpactorSpec& impactor, const ImpactSpec& spec,
                               const SolverSettings& settings = {});

Trajectory real_observe_slide(const RealityConfig& reality, const ShapeSpec& shape,
                              const BodyState& start, double horizon,
                              const SlideSettings& settings = {});

// Slide settings the proxy uses (coupled spin decay).
SlideSettings reality_slide_settings(const RealityConfig& reality,
                                     const SlideSettings& base = {});

// Spec actually executed by the proxy after deterministic impact-point jitter.
ImpactSpec reality_jittered_spec(const RealityConfig& reality, const ShapeSpec& shape,
                                 const ImpactSpec& spec);

}  // namespace impactlab

#endif  // IMPACTLAB_PHYSICS_HPP_
