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

// Sequential pushing along a corridor: route segmentation, the per-strike
// reward, a model-based sub-goal policy and route-level evaluation.
//
// Orientation convention: strikes push a body roughly along its -y axis, so
// the body's travel direction is heading - pi/2. Sub-goal headings and the
// reward's heading error are expressed in travel directions.

#ifndef IMPACTLAB_TASKENV_HPP_
#define IMPACTLAB_TASKENV_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "impactlab/hybrid.hpp"
#include "impactlab/planner.hpp"

namespace impactlab {

struct Route {
  std::string id;
  std::vector<Vec2> waypoints;
  double corridor_half_width = 0.04;
  double segment_length = 0.3;
  bool randomize_heading = true;  // start heading jittered per trial

  // kDegenerateRoute for fewer than two waypoints or a zero-length leg,
  // kConfig for non-positive widths or lengths.
  void validate() const;
  double length() const;
  // Distance from p to the polyline.
  double distance_to(const Vec2& p) const;
  // Unit direction of the first and last legs.
  Vec2 start_direction() const;
  Vec2 end_direction() const;
};

Route route_from_json(const std::string& text);
std::string route_to_json(const Route& route);

// Evaluation fixtures, ordered by difficulty: straight 0.9 m, one 45 degree
// bend over 1.2 m, two bends over 1.5 m (fixed start heading).
Route fixture_route(int index);  // 1..3, kInvalidArgument otherwise
std::vector<Route> fixture_routes();

struct SubGoal {
  Vec2 pos = Vec2::Zero();
  double heading = 0.0;  // travel direction, rad
  double reach_radius = 0.04;
};

std::vector<SubGoal> segment_route(const Route& route);

inline double travel_direction(double heading) { return wrap_angle(heading - kPi / 2); }
inline double heading_for_travel(double direction) { return wrap_angle(direction + kPi / 2); }

struct RewardConfig {
  int max_strikes = 5;       // T, per segment
  double exit_penalty = -10.0;  // r0

  void validate() const;  // kConfig
};

struct EpisodeState {
  BodyState pose;
  int segment = 0;   // index of the current sub-goal
  int strikes = 0;   // strikes spent on the current segment
  int total_strikes = 0;
  int completed = 0;  // sub-goals reached
  bool done = false;
  bool success = false;
  double cumulative_reward = 0.0;
};

struct RewardTerms {
  double r1 = 0.0;  // exp(-dx^2)
  double r2 = 0.0;  // (1 + cos dtheta) / 2, on reach
  double r3 = 0.0;  // T - t, on reach
  double r4 = 0.0;  // r0, on exit
  double total() const { return r1 + r2 + r3 + r4; }
};

struct StepEvents {
  bool reached = false;
  bool exited = false;
  bool budget_exhausted = false;
  bool route_complete = false;
  bool terminal() const { return exited || budget_exhausted || route_complete; }
};

struct RewardResult {
  RewardTerms terms;
  StepEvents events;
  double distance = 0.0;       // dx, m
  double heading_error = 0.0;  // dtheta, rad
};

// `state.strikes` already counts the strike being rewarded. Corridor exit
// takes precedence over a reach on the same strike.
RewardResult step_reward(const EpisodeState& state, const BodyState& new_pose,
                         const SubGoal& goal, bool in_corridor, const RewardConfig& cfg);

// Body position plus the current sub-goal in the body's travel frame.
struct Observation {
  Vec2 pos = Vec2::Zero();
  Vec2 goal_offset = Vec2::Zero();  // sub-goal minus pos, travel frame
  double goal_heading_error = 0.0;  // sub-goal heading minus travel direction
  std::vector<double> to_vector() const;
};

struct StepResult {
  Observation obs;
  RewardResult reward;
  StrikeOutcome outcome;
  bool done = false;
};

// Gym-style environment over one route. Holds references to the engine and
// route, which must outlive it.
class TaskEnv {
 public:
  TaskEnv(const HybridEngine& engine, const ShapeSpec& shape, const ImpactorSpec& impactor,
          const Route& route, const RewardConfig& reward = {});

  Observation reset(const BodyState& start);
  // kConfig when the episode is over.
  StepResult step(const ImpactSpec& spec);
  Observation observe() const;

  const EpisodeState& state() const { return state_; }
  const std::vector<SubGoal>& subgoals() const { return goals_; }
  const SubGoal& current_goal() const;
  const Route& route() const { return route_; }
  const ShapeSpec& shape() const { return shape_; }
  const ImpactorSpec& impactor() const { return impactor_; }
  const RewardConfig& reward_config() const { return reward_; }

 private:
  const HybridEngine& engine_;
  ShapeSpec shape_;
  ImpactorSpec impactor_;
  const Route& route_;
  RewardConfig reward_;
  std::vector<SubGoal> goals_;
  EpisodeState state_;
};

// Start pose at the first waypoint facing along the route, with the heading
// jittered by up to +-jitter when the route allows it.
BodyState route_start_pose(const Route& route, std::uint64_t seed, double jitter);

struct PolicyAction {
  ImpactSpec spec;
  bool reorient = false;
  double predicted_loss = 0.0;
};

// Plans one strike at the sub-goal on `engine`. kNoFeasibleStrike when the
// sub-goal lies more than pi/2 off the travel direction, since no arc strike
// can push the body that way.
PolicyAction plan_subgoal_strike(const HybridEngine& engine, const ShapeSpec& shape,
                                 const ImpactorSpec& impactor, const BodyState& pose,
                                 const SubGoal& goal, const CmaConfig& cfg);

// plan_subgoal_strike, or a turn-in-place strike toward the sub-goal when the
// arc faces away.
PolicyAction greedy_subgoal_policy(const HybridEngine& engine, const ShapeSpec& shape,
                                   const ImpactorSpec& impactor, const BodyState& pose,
                                   const SubGoal& goal, const CmaConfig& cfg);

struct RouteRunConfig {
  int trials = 10;
  std::uint64_t seed = 0;
  CmaConfig planner;  // seed overridden per strike
  RewardConfig reward;
  double heading_jitter = kPi / 6;
  // Re-seed the proxy's jitter per trial so repeated trials differ.
  bool reseed_reality = true;

  void validate() const;
};

struct StrikeLog {
  int index = 0;    // within the trial
  int segment = 0;
  int t = 0;        // strikes on the segment including this one
  std::uint64_t plan_seed = 0;
  ImpactSpec spec;
  bool reorient = false;
  BodyState resting;
  RewardResult reward;
};

struct TrialLog {
  int trial = 0;
  std::uint64_t seed = 0;
  BodyState start;
  bool success = false;
  int completed_segments = 0;
  double total_reward = 0.0;
  std::vector<StrikeLog> strikes;
};

struct RouteResult {
  std::string route_id;
  std::string policy_engine;
  int trials = 0;
  int segments = 0;  // per trial
  int successes = 0;
  int completed_segments = 0;  // summed over trials
  double sr = 0.0;
  double sgcr = 0.0;
  double wall_clock = 0.0;
  std::vector<TrialLog> logs;
};

// Plans on `policy`, executes on `eval`. A trial stops on corridor exit, on
// T strikes without reaching the sub-goal, or on completing the route. SGCR
// counts segments completed in failed trials too.
RouteResult run_route(const HybridEngine& policy, const HybridEngine& eval,
                      const ShapeSpec& shape, const ImpactorSpec& impactor, const Route& route,
                      const RouteRunConfig& cfg);

// One JSON object per strike.
std::string route_log_jsonl(const RouteResult& result);

}  // namespace impactlab

#endif  // IMPACTLAB_TASKENV_HPP_
