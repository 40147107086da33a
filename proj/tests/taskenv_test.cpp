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

#include "impactlab/taskenv.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "json.hpp"

namespace impactlab {
namespace {

const ShapeSpec kDisc = default_shape(ShapeKind::kSemiDisc);
const ImpactorSpec kImpactor{};

template <class F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

Route straight(double len) {
  Route r;
  r.id = "straight";
  r.waypoints = {{0.0, 0.0}, {len, 0.0}};
  return r;
}

TEST(SegmentRoute, StraightRouteHasEqualHeadings) {
  const auto goals = segment_route(straight(0.9));
  ASSERT_EQ(goals.size(), 3u);
  for (std::size_t i = 0; i < goals.size(); ++i) {
    EXPECT_NEAR(goals[i].pos.x(), 0.3 * (i + 1), 1e-12);
    EXPECT_NEAR(goals[i].heading, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(goals[i].reach_radius, 0.04);
  }
}

TEST(SegmentRoute, RemainderSegment) {
  const auto goals = segment_route(straight(0.75));
  ASSERT_EQ(goals.size(), 3u);
  EXPECT_NEAR(goals[0].pos.x(), 0.3, 1e-12);
  EXPECT_NEAR(goals[1].pos.x(), 0.6, 1e-12);
  EXPECT_NEAR(goals[2].pos.x(), 0.75, 1e-12);
}

TEST(SegmentRoute, CornerHeadingFollowsSecondLeg) {
  Route r;
  r.waypoints = {{0.0, 0.0}, {0.6, 0.0}, {0.6, 0.6}};
  const auto goals = segment_route(r);
  ASSERT_EQ(goals.size(), 4u);
  EXPECT_NEAR(goals[1].pos.x(), 0.6, 1e-12);
  EXPECT_NEAR(goals[1].pos.y(), 0.0, 1e-12);
  EXPECT_NEAR(goals[1].heading, kPi / 2, 1e-12);
  EXPECT_NEAR(goals[0].heading, 0.0, 1e-12);
  EXPECT_NEAR(goals[3].heading, kPi / 2, 1e-12);  // incoming direction
}

TEST(SegmentRoute, ConsecutiveGoalsOneSegmentApartOnFixtures) {
  const double lengths[] = {0.9, 1.2, 1.5};
  for (int i = 1; i <= 3; ++i) {
    const Route r = fixture_route(i);
    EXPECT_NEAR(r.length(), lengths[i - 1], 1e-12);
    const auto goals = segment_route(r);
    EXPECT_NEAR((goals[0].pos - r.waypoints.front()).norm(), 0.3, 1e-12);
    for (std::size_t k = 1; k < goals.size(); ++k) {
      EXPECT_NEAR((goals[k].pos - goals[k - 1].pos).norm(), 0.3, 1e-12);
      // Segments are straight, so every sub-goal lies on the polyline.
      EXPECT_NEAR(r.distance_to(goals[k].pos), 0.0, 1e-12);
    }
  }
  EXPECT_FALSE(fixture_route(3).randomize_heading);
  EXPECT_EQ(code_of([] { fixture_route(4); }), ErrorCode::kInvalidArgument);
}

TEST(SegmentRoute, DegenerateRoutes) {
  Route one;
  one.waypoints = {{0.0, 0.0}};
  EXPECT_EQ(code_of([&] { segment_route(one); }), ErrorCode::kDegenerateRoute);
  Route dup;
  dup.waypoints = {{0.0, 0.0}, {0.3, 0.0}, {0.3, 0.0}};
  EXPECT_EQ(code_of([&] { segment_route(dup); }), ErrorCode::kDegenerateRoute);
  Route narrow = straight(0.9);
  narrow.corridor_half_width = 0.0;
  EXPECT_EQ(code_of([&] { segment_route(narrow); }), ErrorCode::kConfig);
}

TEST(Route, JsonRoundTripAndDistance) {
  const Route r = fixture_route(2);
  const Route back = route_from_json(route_to_json(r));
  EXPECT_EQ(back.id, r.id);
  ASSERT_EQ(back.waypoints.size(), r.waypoints.size());
  for (std::size_t i = 0; i < r.waypoints.size(); ++i) EXPECT_EQ(back.waypoints[i], r.waypoints[i]);
  EXPECT_EQ(back.randomize_heading, r.randomize_heading);
  EXPECT_EQ(code_of([] { route_from_json("{\"waypoints\": [[0, 0]]}"); }),
            ErrorCode::kDegenerateRoute);
  EXPECT_EQ(code_of([] { route_from_json("{oops"); }), ErrorCode::kConfig);

  const Route s = straight(0.9);
  EXPECT_NEAR(s.distance_to({0.4, 0.03}), 0.03, 1e-12);
  EXPECT_NEAR(s.distance_to({-0.04, 0.03}), 0.05, 1e-12);
}

TEST(StepReward, WorkedExample) {
  EpisodeState st;
  st.strikes = 2;
  const SubGoal g{{0.3, 0.0}, 0.0, 0.04};
  BodyState pose;
  pose.pos = g.pos;
  pose.heading = heading_for_travel(0.0);
  const RewardResult r = step_reward(st, pose, g, true, {});
  EXPECT_DOUBLE_EQ(r.terms.r1, 1.0);
  EXPECT_DOUBLE_EQ(r.terms.r2, 1.0);
  EXPECT_DOUBLE_EQ(r.terms.r3, 3.0);
  EXPECT_DOUBLE_EQ(r.terms.r4, 0.0);
  EXPECT_DOUBLE_EQ(r.terms.total(), 5.0);
  EXPECT_TRUE(r.events.reached);
  EXPECT_FALSE(r.events.terminal());
}

TEST(StepReward, OppositeHeadingAndExit) {
  EpisodeState st;
  st.strikes = 1;
  const SubGoal g{{0.3, 0.0}, 0.0, 0.04};
  BodyState pose;
  pose.pos = {0.29, 0.0};
  pose.heading = heading_for_travel(kPi);
  const RewardResult flipped = step_reward(st, pose, g, true, {});
  EXPECT_TRUE(flipped.events.reached);
  EXPECT_NEAR(flipped.terms.r2, 0.0, 1e-15);

  const RewardResult out = step_reward(st, pose, g, false, {});
  EXPECT_DOUBLE_EQ(out.terms.r4, -10.0);
  EXPECT_TRUE(out.events.exited);
  EXPECT_FALSE(out.events.reached);
  EXPECT_TRUE(out.events.terminal());
  EXPECT_NEAR(out.terms.total(), std::exp(-1e-4) - 10.0, 1e-12);
}

TEST(StepReward, BudgetExhaustion) {
  EpisodeState st;
  st.strikes = 5;
  const SubGoal g{{0.3, 0.0}, 0.0, 0.04};
  BodyState pose;
  pose.pos = {0.2, 0.0};
  const RewardResult r = step_reward(st, pose, g, true, {});
  EXPECT_TRUE(r.events.budget_exhausted);
  EXPECT_TRUE(r.events.terminal());
  st.strikes = 4;
  EXPECT_FALSE(step_reward(st, pose, g, true, {}).events.terminal());
}

TEST(StepReward, BoundedPerStrike) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const RewardConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    EpisodeState st;
    st.strikes = 1 + static_cast<int>(rng() % cfg.max_strikes);
    const SubGoal g{{0.0, 0.0}, kPi * u(rng), 0.04};
    BodyState pose;
    pose.pos = Vec2(u(rng), u(rng)) * (i % 2 ? 0.05 : 0.5);
    pose.heading = kPi * u(rng);
    const RewardResult r = step_reward(st, pose, g, rng() % 4 != 0, cfg);
    EXPECT_LE(r.terms.total(), 1.0 + 1.0 + (cfg.max_strikes - 1));
    EXPECT_GE(r.terms.total(), cfg.exit_penalty);
  }
}

TEST(TaskEnv, StepsObservesAndTerminates) {
  const auto engine = HybridEngine::real_proxy(ShapeKind::kSemiDisc, RealityConfig{});
  const Route r = straight(0.9);
  TaskEnv env(engine, kDisc, kImpactor, r);
  EXPECT_EQ(code_of([&] { env.step({0.5, kPi / 2, 0.0}); }), ErrorCode::kConfig);

  const Observation o = env.reset(route_start_pose(r, 0, 0.0));
  EXPECT_NEAR(o.goal_offset.x(), 0.3, 1e-12);  // straight ahead in the travel frame
  EXPECT_NEAR(o.goal_offset.y(), 0.0, 1e-12);
  EXPECT_NEAR(o.goal_heading_error, 0.0, 1e-12);
  EXPECT_EQ(o.to_vector().size(), 5u);

  // A centred strike pushes along the travel direction.
  const StepResult s = env.step({0.8, kPi / 2, 0.0});
  EXPECT_GT(s.outcome.resting.pos.x(), 0.05);
  EXPECT_NEAR(s.outcome.resting.pos.y(), 0.0, 0.01);
  EXPECT_EQ(env.state().strikes, 1);
  EXPECT_FALSE(s.done);

  // Strikes that barely move the block use up the budget.
  StepResult last = s;
  while (!last.done) last = env.step({0.2, kPi / 2, 0.0});
  EXPECT_TRUE(last.reward.events.budget_exhausted);
  EXPECT_EQ(env.state().total_strikes, 5);
  EXPECT_FALSE(env.state().success);
}

TEST(TaskEnv, SidewaysStrikeLeavesCorridor) {
  const auto engine = HybridEngine::real_proxy(ShapeKind::kSemiDisc, RealityConfig{});
  const Route r = straight(0.9);
  TaskEnv env(engine, kDisc, kImpactor, r);
  env.reset(route_start_pose(r, 0, 0.0));
  const StepResult s = env.step({0.8, kPi / 12, 0.0});  // pushes across the corridor
  EXPECT_TRUE(s.reward.events.exited);
  EXPECT_TRUE(s.done);
  EXPECT_DOUBLE_EQ(s.reward.terms.r4, -10.0);
}

TEST(StartPose, FacesAlongRoute) {
  const Route r3 = fixture_route(3);
  const BodyState b = route_start_pose(r3, 9, kPi / 6);
  EXPECT_NEAR(travel_direction(b.heading), 0.0, 1e-12);  // fixed heading
  const Route r1 = fixture_route(1);
  bool varied = false;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double off = travel_direction(route_start_pose(r1, s, kPi / 6).heading);
    EXPECT_LE(std::abs(off), kPi / 6);
    varied = varied || std::abs(off) > 1e-3;
  }
  EXPECT_TRUE(varied);
}

TEST(Policy, GoalAheadGivesStraightStrike) {
  const auto engine = HybridEngine::full_solver(ShapeKind::kSemiDisc, {0.3, 0.25, 0.35, 0.6});
  BodyState pose;  // heading 0: travel direction is -y
  const SubGoal g{{0.0, -0.06}, -kPi / 2, 0.04};
  CmaConfig cfg;
  cfg.seed = 1;
  const PolicyAction a = plan_subgoal_strike(engine, kDisc, kImpactor, pose, g, cfg);
  EXPECT_FALSE(a.reorient);
  EXPECT_LT(std::abs(a.spec.deflection), kPi / 24);
  EXPECT_NEAR(a.spec.point_param, kPi / 2, kPi / 24);
  const PolicyAction again = plan_subgoal_strike(engine, kDisc, kImpactor, pose, g, cfg);
  EXPECT_EQ(a.spec, again.spec);
}

TEST(Policy, GoalBehindTriggersReorientation) {
  const auto engine = HybridEngine::full_solver(ShapeKind::kSemiDisc, {0.3, 0.25, 0.35, 0.6});
  BodyState pose;
  const SubGoal behind{{0.0, 0.2}, kPi / 2, 0.04};
  CmaConfig cfg;
  cfg.seed = 2;
  EXPECT_EQ(code_of([&] { plan_subgoal_strike(engine, kDisc, kImpactor, pose, behind, cfg); }),
            ErrorCode::kNoFeasibleStrike);
  const PolicyAction a = greedy_subgoal_policy(engine, kDisc, kImpactor, pose, behind, cfg);
  EXPECT_TRUE(a.reorient);
  // The turn strike rotates the body toward the goal.
  const StrikeOutcome o = strike_and_settle(engine, kDisc, kImpactor, pose, a.spec);
  const double before = std::abs(wrap_angle(travel_direction(0.0) - kPi / 2));
  const double after = std::abs(wrap_angle(travel_direction(o.resting.heading) - kPi / 2));
  EXPECT_LT(after, before);
}

RouteRunConfig quick_run(std::uint64_t seed, int trials) {
  RouteRunConfig rc;
  rc.seed = seed;
  rc.trials = trials;
  rc.planner.max_evals = 300;
  return rc;
}

TEST(RunRoute, OracleCompletesRouteOne) {
  const auto real = HybridEngine::real_proxy(ShapeKind::kSemiDisc, RealityConfig{});
  const RouteResult res =
      run_route(real, real, kDisc, kImpactor, fixture_route(1), quick_run(500, 10));
  EXPECT_EQ(res.segments, 3);
  EXPECT_DOUBLE_EQ(res.sgcr, 1.0);
  EXPECT_DOUBLE_EQ(res.sr, 1.0);
  EXPECT_EQ(res.policy_engine, "real");
}

TEST(RunRoute, LogsReproduceRewardsAndRates) {
  const auto real = HybridEngine::real_proxy(ShapeKind::kSemiDisc, RealityConfig{});
  const auto mismatched =
      HybridEngine::full_solver(ShapeKind::kSemiDisc, {0.2875, 1.0, 0.1, 0.1});
  const Route r = fixture_route(2);
  const RouteResult res = run_route(mismatched, real, kDisc, kImpactor, r, quick_run(7, 4));
  ASSERT_EQ(res.logs.size(), 4u);
  int completed = 0, successes = 0;
  for (const TrialLog& log : res.logs) {
    double total = 0.0;
    int reached = 0;
    for (const StrikeLog& s : log.strikes) {
      total += s.reward.terms.r1 + s.reward.terms.r2 + s.reward.terms.r3 + s.reward.terms.r4;
      reached += s.reward.events.reached ? 1 : 0;
      EXPECT_GE(s.t, 1);
      EXPECT_LE(s.t, 5);
    }
    EXPECT_DOUBLE_EQ(total, log.total_reward);
    EXPECT_EQ(reached, log.completed_segments);
    // A success has every segment counted.
    if (log.success) {
      EXPECT_EQ(log.completed_segments, res.segments);
    }
    completed += log.completed_segments;
    successes += log.success ? 1 : 0;
  }
  EXPECT_DOUBLE_EQ(res.sgcr, static_cast<double>(completed) / (res.segments * 4));
  EXPECT_DOUBLE_EQ(res.sr, successes / 4.0);
  EXPECT_LE(res.sr, res.sgcr);

  std::istringstream lines(route_log_jsonl(res));
  std::string line;
  std::size_t n = 0;
  double sum = 0.0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    sum += j["reward"]["total"].get<double>();
    ++n;
  }
  std::size_t strikes = 0;
  double want = 0.0;
  for (const TrialLog& log : res.logs) {
    strikes += log.strikes.size();
    want += log.total_reward;
  }
  EXPECT_EQ(n, strikes);
  EXPECT_NEAR(sum, want, 1e-9);
}

TEST(RunRoute, DeterministicAndThreadInvariant) {
  const auto real = HybridEngine::real_proxy(ShapeKind::kSemiDisc, RealityConfig{});
  const auto full = HybridEngine::full_solver(ShapeKind::kSemiDisc, {0.3, 0.25, 0.35, 0.6});
  const Route r = fixture_route(1);
  const unsigned saved = max_threads();
  set_max_threads(1);
  const std::string a = route_log_jsonl(run_route(full, real, kDisc, kImpactor, r, quick_run(3, 3)));
  set_max_threads(4);
  const std::string b = route_log_jsonl(run_route(full, real, kDisc, kImpactor, r, quick_run(3, 3)));
  set_max_threads(saved);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
}

TEST(RunRoute, RejectsBadConfig) {
  const auto real = HybridEngine::real_proxy(ShapeKind::kSemiDisc, RealityConfig{});
  RouteRunConfig rc;
  rc.trials = 0;
  EXPECT_EQ(code_of([&] { run_route(real, real, kDisc, kImpactor, fixture_route(1), rc); }),
            ErrorCode::kConfig);
}

}  // namespace
}  // namespace impactlab
