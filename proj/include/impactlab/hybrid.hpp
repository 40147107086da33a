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

// Strike-and-settle world stepping. The sliding phase always runs on the
// base dynamics; only the impulsive collision is swapped between the
// micro-stepped solver, the learned surrogate, and the real-world proxy.

#ifndef IMPACTLAB_HYBRID_HPP_
#define IMPACTLAB_HYBRID_HPP_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "impactlab/physics.hpp"
#include "impactlab/surrogate.hpp"

namespace impactlab {

enum class CollisionModel { kFullSolver, kSurrogate, kRealProxy };
std::string_view collision_model_name(CollisionModel model);

// What the surrogate engine does with a spec outside its envelope.
enum class FallbackPolicy { kFallbackToFull, kClamp, kError };

// Fraction of each spec axis trimmed off both ends to form the envelope.
inline constexpr double kEnvelopeShrink = 0.02;

// Immutable once built; safe to share between threads.
class HybridEngine {
 public:
  static HybridEngine full_solver(ShapeKind shape, const ContactParams& params,
                                  const SolverSettings& solver = {});
  static HybridEngine surrogate(ShapeKind shape, std::shared_ptr<const Mlp> model,
                                const ContactParams& params,
                                FallbackPolicy fallback = FallbackPolicy::kFallbackToFull,
                                const SolverSettings& solver = {});
  static HybridEngine real_proxy(ShapeKind shape, const RealityConfig& reality,
                                 const SolverSettings& solver = {});

  CollisionModel model() const { return model_; }
  ShapeKind shape() const { return shape_; }
  // Parameters the engine simulates with; the hidden ones for the proxy.
  const ContactParams& params() const;
  const SpecBox& envelope() const { return envelope_; }
  FallbackPolicy fallback() const { return fallback_; }
  const SolverSettings& solver() const { return solver_; }
  const SlideSettings& slide() const { return slide_; }
  const Mlp* network() const { return network_.get(); }
  const RealityConfig& reality() const { return reality_; }

  double slide_horizon = 30.0;  // s

 private:
  HybridEngine() = default;

  CollisionModel model_ = CollisionModel::kFullSolver;
  ShapeKind shape_ = ShapeKind::kSemiDisc;
  ContactParams params_;
  std::shared_ptr<const Mlp> network_;
  RealityConfig reality_;
  SpecBox envelope_;
  FallbackPolicy fallback_ = FallbackPolicy::kFallbackToFull;
  SolverSettings solver_;
  SlideSettings slide_;
};

struct StrikeOutcome {
  ImpactSpec spec;          // as requested
  PostImpact post;
  BodyState resting;
  bool used_fallback = false;  // full solver stood in for the surrogate
  bool clamped = false;        // spec was clamped into the envelope
  double collision_wall_clock = 0.0;  // s, collision resolution only
  double total_wall_clock = 0.0;      // s
};

// Resolves one strike on a target resting at `pose` and slides it to rest.
// kEnvelopeViolation for an out-of-envelope spec under FallbackPolicy::kError;
// kShapeMismatch if the shape kind differs from the engine's.
StrikeOutcome strike_and_settle(const HybridEngine& engine, const ShapeSpec& shape,
                                const ImpactorSpec& impactor, const BodyState& pose,
                                const ImpactSpec& spec, Trajectory* trace = nullptr);

// Sequential strikes, each starting from the previous resting pose.
std::vector<StrikeOutcome> rollout_route(const HybridEngine& engine, const ShapeSpec& shape,
                                         const ImpactorSpec& impactor, const BodyState& start,
                                         const std::vector<ImpactSpec>& strikes,
                                         std::vector<Trajectory>* traces = nullptr);

// Pose time series of a rollout as JSON: one entry per strike with dt and
// [x, y, heading] rows.
std::string traces_to_json(const std::vector<Trajectory>& traces);

}  // namespace impactlab

#endif  // IMPACTLAB_HYBRID_HPP_
