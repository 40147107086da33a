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

#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "impactlab/pipeline.hpp"
#include "json.hpp"

namespace impactlab {
namespace {

const ShapeSpec kDisc = default_shape(ShapeKind::kSemiDisc);
const ImpactorSpec kImpactor{};
const ContactParams kParams{0.3, 0.25, 0.35, 0.6};

std::shared_ptr<const Mlp> pretrained_disc() {
  static const std::shared_ptr<const Mlp> model = [] {
    const Dataset d = generate_sim_dataset(kDisc, kImpactor, kDefaultSimSamples, 11);
    return std::make_shared<const Mlp>(pretrain(init_surrogate(d, 12), d).first);
  }();
  return model;
}

ImpactSpec draw(std::mt19937_64& rng, const SpecBox& box) {
  std::array<double, 3> a;
  for (int k = 0; k < 3; ++k) a[k] = std::uniform_real_distribution<double>(box.lo[k], box.hi[k])(rng);
  return ImpactSpec::from_array(a);
}

template <class F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

TEST(HybridEngine, EnvelopeIsShrunkSamplingBox) {
  const auto e = HybridEngine::surrogate(ShapeKind::kSemiDisc, pretrained_disc(), kParams);
  const SpecBox box = spec_box(ShapeKind::kSemiDisc);
  for (int i = 0; i < 3; ++i) {
    const double pad = 0.02 * (box.hi[i] - box.lo[i]);
    EXPECT_NEAR(e.envelope().lo[i], box.lo[i] + pad, 1e-15);
    EXPECT_NEAR(e.envelope().hi[i], box.hi[i] - pad, 1e-15);
  }
  EXPECT_EQ(e.fallback(), FallbackPolicy::kFallbackToFull);
  EXPECT_EQ(code_of([] { HybridEngine::surrogate(ShapeKind::kSemiDisc, nullptr, kParams); }),
            ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { HybridEngine::full_solver(ShapeKind::kSquare, {2.0, 0.2, 0.2, 0.2}); }),
            ErrorCode::kConfig);
}

TEST(StrikeAndSettle, OutOfEnvelopeFallsBackToFullExactly) {
  const auto hybrid = HybridEngine::surrogate(ShapeKind::kSemiDisc, pretrained_disc(), kParams);
  const auto full = HybridEngine::full_solver(ShapeKind::kSemiDisc, kParams);
  const ImpactSpec spec{0.205, 1.2, 0.05};  // inside the sampling box, below the envelope
  const BodyState pose{{0.1, -0.2}, 0.4, Vec2::Zero(), 0.0};
  const StrikeOutcome a = strike_and_settle(hybrid, kDisc, kImpactor, pose, spec);
  const StrikeOutcome b = strike_and_settle(full, kDisc, kImpactor, pose, spec);
  EXPECT_TRUE(a.used_fallback);
  EXPECT_FALSE(b.used_fallback);
  EXPECT_EQ(a.post, b.post);
  EXPECT_EQ(a.resting.pos, b.resting.pos);
  EXPECT_EQ(a.resting.heading, b.resting.heading);
}

TEST(StrikeAndSettle, ErrorAndClampPolicies) {
  const ImpactSpec spec{0.79, 1.2, 0.0};
  const auto strict = HybridEngine::surrogate(ShapeKind::kSemiDisc, pretrained_disc(), kParams,
                                              FallbackPolicy::kError);
  EXPECT_EQ(code_of([&] { strike_and_settle(strict, kDisc, kImpactor, {}, spec); }),
            ErrorCode::kEnvelopeViolation);
  const auto clamp = HybridEngine::surrogate(ShapeKind::kSemiDisc, pretrained_disc(), kParams,
                                             FallbackPolicy::kClamp);
  const StrikeOutcome c = strike_and_settle(clamp, kDisc, kImpactor, {}, spec);
  EXPECT_TRUE(c.clamped);
  EXPECT_FALSE(c.used_fallback);
  const ImpactSpec edge{clamp.envelope().hi[0], 1.2, 0.0};
  EXPECT_EQ(c.post, forward(*pretrained_disc(), SurrogateInput{edge, kParams}));
}

TEST(StrikeAndSettle, NoFallbackInsideEnvelope) {
  const auto e = HybridEngine::surrogate(ShapeKind::kSemiDisc, pretrained_disc(), kParams);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const StrikeOutcome o = strike_and_settle(e, kDisc, kImpactor, {}, draw(rng, e.envelope()));
    EXPECT_FALSE(o.used_fallback);
    EXPECT_FALSE(o.clamped);
  }
}

TEST(StrikeAndSettle, RestingStateAndTimingFields) {
  const auto full = HybridEngine::full_solver(ShapeKind::kSemiDisc, kParams);
  const auto hybrid = HybridEngine::surrogate(ShapeKind::kSemiDisc, pretrained_disc(), kParams);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const ImpactSpec s = draw(rng, hybrid.envelope());
    const StrikeOutcome f = strike_and_settle(full, kDisc, kImpactor, {}, s);
    const StrikeOutcome h = strike_and_settle(hybrid, kDisc, kImpactor, {}, s);
    for (const StrikeOutcome* o : {&f, &h}) {
      EXPECT_LE(o->resting.lin_vel.norm(), full.slide().rest_lin);
      EXPECT_LE(std::abs(o->resting.ang_vel), full.slide().rest_ang);
      EXPECT_GE(o->collision_wall_clock, 0.0);
      EXPECT_GE(o->total_wall_clock, o->collision_wall_clock);
    }
    // The full path runs at least a thousand micro-steps.
    EXPECT_LT(h.collision_wall_clock, f.collision_wall_clock);
  }
}

TEST(StrikeAndSettle, ShapeMismatch) {
  const auto e = HybridEngine::full_solver(ShapeKind::kSquare, kParams);
  EXPECT_EQ(code_of([&] { strike_and_settle(e, kDisc, kImpactor, {}, {0.5, 1.0, 0.0}); }),
            ErrorCode::kShapeMismatch);
}

TEST(StrikeAndSettle, EquivariantInStartPose) {
  const auto e = HybridEngine::full_solver(ShapeKind::kSemiDisc, kParams);
  const ImpactSpec s{0.6, 1.0, 0.1};
  const StrikeOutcome at_origin = strike_and_settle(e, kDisc, kImpactor, {}, s);
  const double yaw = 0.7;
  const Vec2 shift{0.3, -0.1};
  const StrikeOutcome moved =
      strike_and_settle(e, kDisc, kImpactor, {shift, yaw, Vec2::Zero(), 0.0}, s);
  const Vec2 want = shift + rotate(at_origin.resting.pos, yaw);
  EXPECT_NEAR(moved.resting.pos.x(), want.x(), 1e-9);
  EXPECT_NEAR(moved.resting.pos.y(), want.y(), 1e-9);
  EXPECT_NEAR(wrap_angle(moved.resting.heading - at_origin.resting.heading - yaw), 0.0, 1e-9);
}

TEST(StrikeAndSettle, IdealProxyMatchesFullSolver) {
  const auto real = HybridEngine::real_proxy(ShapeKind::kSemiDisc, RealityConfig::ideal(kParams));
  const auto full = HybridEngine::full_solver(ShapeKind::kSemiDisc, kParams);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5; ++i) {
    const ImpactSpec s = draw(rng, spec_box(ShapeKind::kSemiDisc));
    const StrikeOutcome a = strike_and_settle(real, kDisc, kImpactor, {}, s);
    const StrikeOutcome b = strike_and_settle(full, kDisc, kImpactor, {}, s);
    EXPECT_EQ(a.post, b.post);
    EXPECT_NEAR((a.resting.pos - b.resting.pos).norm(), 0.0, 1e-12);
  }
}

// Cross-engine agreement of a surrogate pretrained on the engine it replaces.
TEST(StrikeAndSettle, SurrogateRestingPosesTrackFullSolver) {
  const auto full = HybridEngine::full_solver(ShapeKind::kSemiDisc, kParams);
  const auto hybrid = HybridEngine::surrogate(ShapeKind::kSemiDisc, pretrained_disc(), kParams);
  std::mt19937_64 rng(8);
  int close = 0;
  for (int i = 0; i < 200; ++i) {
    const ImpactSpec s = draw(rng, hybrid.envelope());
    const StrikeOutcome f = strike_and_settle(full, kDisc, kImpactor, {}, s);
    const StrikeOutcome h = strike_and_settle(hybrid, kDisc, kImpactor, {}, s);
    if ((f.resting.pos - h.resting.pos).norm() < 0.02) ++close;
  }
  EXPECT_GE(close, 180) << close << "/200 within 0.02 m";
}

TEST(RolloutRoute, EmptySingleAndChained) {
  const auto e = HybridEngine::full_solver(ShapeKind::kSemiDisc, kParams);
  const BodyState start{{0.05, 0.02}, 0.3, Vec2::Zero(), 0.0};
  EXPECT_TRUE(rollout_route(e, kDisc, kImpactor, start, {}).empty());

  const std::vector<ImpactSpec> strikes{{0.5, 1.2, 0.0}, {0.4, 2.0, -0.1}, {0.3, 1.0, 0.2}};
  const auto one = rollout_route(e, kDisc, kImpactor, start, {strikes[0]});
  const StrikeOutcome direct = strike_and_settle(e, kDisc, kImpactor, start, strikes[0]);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].resting.pos, direct.resting.pos);
  EXPECT_EQ(one[0].post, direct.post);

  std::vector<Trajectory> traces;
  const auto all = rollout_route(e, kDisc, kImpactor, start, strikes, &traces);
  ASSERT_EQ(all.size(), 3u);
  ASSERT_EQ(traces.size(), 3u);
  for (std::size_t k = 1; k < all.size(); ++k) {
    const StrikeOutcome again =
        strike_and_settle(e, kDisc, kImpactor, all[k - 1].resting, strikes[k]);
    EXPECT_EQ(again.resting.pos, all[k].resting.pos);
    EXPECT_EQ(again.resting.heading, all[k].resting.heading);
    EXPECT_EQ(traces[k].samples.front().pos, all[k - 1].resting.pos);
  }
  EXPECT_EQ(traces.back().back().pos, all.back().resting.pos);

  const auto doc = nlohmann::json::parse(traces_to_json(traces));
  ASSERT_EQ(doc.size(), 3u);
  EXPECT_EQ(doc[0]["poses"].size(), traces[0].samples.size());
  EXPECT_DOUBLE_EQ(doc[2]["poses"].back()[0].get<double>(), all.back().resting.pos.x());
}

}  // namespace
}  // namespace impactlab
