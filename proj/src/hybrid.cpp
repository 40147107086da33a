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

#include "impactlab/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace impactlab {

std::string_view collision_model_name(CollisionModel model) {
  switch (model) {
    case CollisionModel::kFullSolver:
      return "full";
    case CollisionModel::kSurrogate:
      return "hybrid";
    case CollisionModel::kRealProxy:
      return "real";
  }
  return "?";
}

HybridEngine HybridEngine::full_solver(ShapeKind shape, const ContactParams& params,
                                       const SolverSettings& solver) {
  if (!param_box().contains(params)) {
    fail(ErrorCode::kConfig, "contact parameters outside the parameter box");
  }
  HybridEngine e;
  e.model_ = CollisionModel::kFullSolver;
  e.shape_ = shape;
  e.params_ = params;
  e.envelope_ = spec_box(shape);
  e.solver_ = solver;
  return e;
}

HybridEngine HybridEngine::surrogate(ShapeKind shape, std::shared_ptr<const Mlp> model,
                                     const ContactParams& params, FallbackPolicy fallback,
                                     const SolverSettings& solver) {
  if (!model) fail(ErrorCode::kConfig, "surrogate engine needs a model");
  HybridEngine e = full_solver(shape, params, solver);
  e.model_ = CollisionModel::kSurrogate;
  e.network_ = std::move(model);
  e.envelope_ = spec_box(shape).shrunk(kEnvelopeShrink);
  e.fallback_ = fallback;
  return e;
}

HybridEngine HybridEngine::real_proxy(ShapeKind shape, const RealityConfig& reality,
                                      const SolverSettings& solver) {
  reality.validate();
  HybridEngine e;
  e.model_ = CollisionModel::kRealProxy;
  e.shape_ = shape;
  e.params_ = reality.hidden_params;
  e.reality_ = reality;
  e.envelope_ = spec_box(shape);
  e.solver_ = solver;
  e.slide_ = reality_slide_settings(reality);
  return e;
}

const ContactParams& HybridEngine::params() const { return params_; }

namespace {

ImpactSpec clamp_into(const SpecBox& box, const ImpactSpec& spec) {
  auto a = spec.to_array();
  for (int i = 0; i < 3; ++i) a[i] = std::clamp(a[i], box.lo[i], box.hi[i]);
  return ImpactSpec::from_array(a);
}

}  // namespace

StrikeOutcome strike_and_settle(const HybridEngine& engine, const ShapeSpec& shape,
                                const ImpactorSpec& impactor, const BodyState& pose,
                                const ImpactSpec& spec, Trajectory* trace) {
  if (shape.kind != engine.shape()) {
    fail(ErrorCode::kShapeMismatch, "engine was built for a different shape");
  }
  const double t0 = monotonic_seconds();
  StrikeOutcome out;
  out.spec = spec;
  ImpactSpec applied = spec;

  double tc = 0.0;
  switch (engine.model()) {
    case CollisionModel::kFullSolver: {
      tc = monotonic_seconds();
      out.post = solve_impact_full(shape, impactor, spec, engine.params(), engine.solver());
      tc = monotonic_seconds() - tc;
      break;
    }
    case CollisionModel::kSurrogate: {
      bool use_full = false;
      if (!engine.envelope().contains(spec)) {
        switch (engine.fallback()) {
          case FallbackPolicy::kError:
            fail(ErrorCode::kEnvelopeViolation, "impact spec outside the surrogate envelope");
          case FallbackPolicy::kFallbackToFull:
            use_full = true;
            break;
          case FallbackPolicy::kClamp:
            applied = clamp_into(engine.envelope(), spec);
            out.clamped = true;
            break;
        }
      }
      tc = monotonic_seconds();
      if (use_full) {
        out.post = solve_impact_full(shape, impactor, spec, engine.params(), engine.solver());
        out.used_fallback = true;
      } else {
        out.post = forward(*engine.network(), SurrogateInput{applied, engine.params()});
      }
      tc = monotonic_seconds() - tc;
      if (!out.post.finite()) fail(ErrorCode::kNumeric, "surrogate produced a non-finite state");
      break;
    }
    case CollisionModel::kRealProxy: {
      tc = monotonic_seconds();
      out.post = real_observe_impact(engine.reality(), shape, impactor, spec, engine.solver());
      tc = monotonic_seconds() - tc;
      break;
    }
  }
  out.collision_wall_clock = std::max(0.0, tc);

  const BodyState moving = apply_post_impact(shape, pose, applied, out.post);
  if (trace) {
    *trace = slide_to_rest(shape, moving, engine.params(), engine.slide_horizon, engine.slide());
    out.resting = trace->back();
  } else {
    out.resting = slide_final(shape, moving, engine.params(), engine.slide_horizon,
                              engine.slide());
  }
  if (out.resting.lin_vel.norm() > engine.slide().rest_lin ||
      std::abs(out.resting.ang_vel) > engine.slide().rest_ang) {
    fail(ErrorCode::kNumeric, "target still moving at the end of the slide horizon");
  }
  out.total_wall_clock = std::max(out.collision_wall_clock, monotonic_seconds() - t0);
  return out;
}

std::vector<StrikeOutcome> rollout_route(const HybridEngine& engine, const ShapeSpec& shape,
                                         const ImpactorSpec& impactor, const BodyState& start,
                                         const std::vector<ImpactSpec>& strikes,
                                         std::vector<Trajectory>* traces) {
  std::vector<StrikeOutcome> out;
  out.reserve(strikes.size());
  if (traces) traces->clear();
  BodyState pose = start;
  for (const ImpactSpec& s : strikes) {
    Trajectory t;
    out.push_back(strike_and_settle(engine, shape, impactor, pose, s, traces ? &t : nullptr));
    if (traces) traces->push_back(std::move(t));
    pose = out.back().resting;
  }
  return out;
}

std::string traces_to_json(const std::vector<Trajectory>& traces) {
  nlohmann::json doc = nlohmann::json::array();
  for (const Trajectory& t : traces) {
    nlohmann::json poses = nlohmann::json::array();
    for (const BodyState& s : t.samples) poses.push_back({s.pos.x(), s.pos.y(), s.heading});
    doc.push_back({{"dt", t.dt}, {"poses", std::move(poses)}});
  }
  return doc.dump();
}

}  // namespace impactlab
