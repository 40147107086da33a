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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

namespace impactlab {

using nlohmann::json;

namespace {

constexpr double kLegEps = 1e-9;

double direction_angle(const Vec2& v) { return std::atan2(v.y(), v.x()); }

// Point at arclength s along the polyline.
Vec2 point_at(const Route& r, double s) {
  for (std::size_t i = 0; i + 1 < r.waypoints.size(); ++i) {
    const Vec2 leg = r.waypoints[i + 1] - r.waypoints[i];
    const double len = leg.norm();
    if (s <= len) return r.waypoints[i] + leg * (s / len);
    s -= len;
  }
  return r.waypoints.back();
}

}  // namespace

void Route::validate() const {
  if (waypoints.size() < 2) fail(ErrorCode::kDegenerateRoute, "route needs two waypoints");
  for (const Vec2& w : waypoints) {
    if (!w.allFinite()) fail(ErrorCode::kDegenerateRoute, "non-finite waypoint");
  }
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    if ((waypoints[i + 1] - waypoints[i]).norm() < kLegEps) {
      fail(ErrorCode::kDegenerateRoute, "zero-length route leg " + std::to_string(i));
    }
  }
  if (!(corridor_half_width > 0.0) || !(segment_length > 0.0)) {
    fail(ErrorCode::kConfig, "corridor width and segment length must be positive");
  }
}

double Route::length() const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    s += (waypoints[i + 1] - waypoints[i]).norm();
  }
  return s;
}

double Route::distance_to(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec2 a = waypoints[i];
    const Vec2 ab = waypoints[i + 1] - a;
    const double u = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - (a + u * ab)).norm());
  }
  return best;
}

Vec2 Route::start_direction() const { return (waypoints[1] - waypoints[0]).normalized(); }

Vec2 Route::end_direction() const {
  const std::size_t n = waypoints.size();
  return (waypoints[n - 1] - waypoints[n - 2]).normalized();
}

Route route_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("route json: ") + e.what());
  }
  Route r;
  try {
    r.id = doc.value("id", std::string("route"));
    for (const auto& w : doc.at("waypoints")) {
      r.waypoints.emplace_back(w.at(0).get<double>(), w.at(1).get<double>());
    }
    r.corridor_half_width = doc.value("corridor_half_width", r.corridor_half_width);
    r.segment_length = doc.value("segment_length", r.segment_length);
    r.randomize_heading = doc.value("randomize_heading", r.randomize_heading);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("route json: ") + e.what());
  }
  r.validate();
  return r;
}

std::string route_to_json(const Route& route) {
  json doc;
  doc["id"] = route.id;
  json pts = json::array();
  for (const Vec2& w : route.waypoints) pts.push_back({w.x(), w.y()});
  doc["waypoints"] = pts;
  doc["corridor_half_width"] = route.corridor_half_width;
  doc["segment_length"] = route.segment_length;
  doc["randomize_heading"] = route.randomize_heading;
  return doc.dump();
}

Route fixture_route(int index) {
  const double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
  Route r;
  switch (index) {
    case 1:
      r.id = "route1";
      r.waypoints = {{0.0, 0.0}, {0.9, 0.0}};
      break;
    case 2:
      r.id = "route2";
      r.waypoints = {{0.0, 0.0}, {0.6, 0.0}, {0.6 + 0.6 * c, 0.6 * s}};
      break;
    case 3:
      // Legs of 0.6, 0.3 and 0.6 so every segment is straight.
      r.id = "route3";
      r.waypoints = {{0.0, 0.0}, {0.6, 0.0}, {0.6 + 0.3 * c, 0.3 * s}, {1.2 + 0.3 * c, 0.3 * s}};
      r.randomize_heading = false;
      break;
    default:
      fail(ErrorCode::kInvalidArgument, "fixture routes are numbered 1 to 3");
  }
  return r;
}

std::vector<Route> fixture_routes() { return {fixture_route(1), fixture_route(2), fixture_route(3)}; }

std::vector<SubGoal> segment_route(const Route& route) {
  route.validate();
  const double total = route.length();
  std::vector<double> marks;
  for (int k = 1;; ++k) {
    const double s = k * route.segment_length;
    if (s > total - kLegEps) break;
    marks.push_back(s);
  }
  marks.push_back(total);

  std::vector<SubGoal> goals;
  for (double s : marks) {
    SubGoal g;
    g.pos = point_at(route, s);
    g.reach_radius = route.corridor_half_width;
    goals.push_back(g);
  }
  for (std::size_t i = 0; i + 1 < goals.size(); ++i) {
    goals[i].heading = direction_angle(goals[i + 1].pos - goals[i].pos);
  }
  goals.back().heading = direction_angle(route.end_direction());
  return goals;
}

void RewardConfig::validate() const {
  if (max_strikes < 1) fail(ErrorCode::kConfig, "T must be at least 1");
  if (!std::isfinite(exit_penalty)) fail(ErrorCode::kConfig, "r0 must be finite");
}

RewardResult step_reward(const EpisodeState& state, const BodyState& new_pose,
                         const SubGoal& goal, bool in_corridor, const RewardConfig& cfg) {
  RewardResult out;
  out.distance = (new_pose.pos - goal.pos).norm();
  out.heading_error = std::abs(wrap_angle(travel_direction(new_pose.heading) - goal.heading));
  out.terms.r1 = std::exp(-out.distance * out.distance);
  if (!in_corridor) {
    out.terms.r4 = cfg.exit_penalty;
    out.events.exited = true;
    return out;
  }
  if (out.distance < goal.reach_radius) {
    out.events.reached = true;
    out.terms.r2 = 0.5 * (1.0 + std::cos(out.heading_error));
    out.terms.r3 = cfg.max_strikes - state.strikes;
  } else if (state.strikes >= cfg.max_strikes) {
    out.events.budget_exhausted = true;
  }
  return out;
}

std::vector<double> Observation::to_vector() const {
  return {pos.x(), pos.y(), goal_offset.x(), goal_offset.y(), goal_heading_error};
}

TaskEnv::TaskEnv(const HybridEngine& engine, const ShapeSpec& shape,
                 const ImpactorSpec& impactor, const Route& route, const RewardConfig& reward)
    : engine_(engine), shape_(shape), impactor_(impactor), route_(route), reward_(reward) {
  reward_.validate();
  goals_ = segment_route(route_);
  state_.done = true;
}

Observation TaskEnv::reset(const BodyState& start) {
  if (!start.finite()) fail(ErrorCode::kInvalidArgument, "non-finite start pose");
  state_ = EpisodeState{};
  state_.pose = start;
  state_.pose.lin_vel = Vec2::Zero();
  state_.pose.ang_vel = 0.0;
  return observe();
}

const SubGoal& TaskEnv::current_goal() const {
  return goals_[std::min<std::size_t>(state_.segment, goals_.size() - 1)];
}

Observation TaskEnv::observe() const {
  const SubGoal& g = current_goal();
  const double dir = travel_direction(state_.pose.heading);
  Observation o;
  o.pos = state_.pose.pos;
  o.goal_offset = rotate(g.pos - state_.pose.pos, -dir);
  o.goal_heading_error = wrap_angle(g.heading - dir);
  return o;
}

StepResult TaskEnv::step(const ImpactSpec& spec) {
  if (state_.done) fail(ErrorCode::kConfig, "episode is over; call reset");
  StepResult out;
  Trajectory trace;
  out.outcome = strike_and_settle(engine_, shape_, impactor_, state_.pose, spec, &trace);

  bool inside = true;
  for (const BodyState& b : trace.samples) {
    if (route_.distance_to(b.pos) > route_.corridor_half_width) {
      inside = false;
      break;
    }
  }
  ++state_.strikes;
  ++state_.total_strikes;
  out.reward = step_reward(state_, out.outcome.resting, current_goal(), inside, reward_);
  state_.pose = out.outcome.resting;
  state_.cumulative_reward += out.reward.terms.total();

  if (out.reward.events.reached) {
    ++state_.completed;
    ++state_.segment;
    state_.strikes = 0;
    if (state_.segment == static_cast<int>(goals_.size())) {
      out.reward.events.route_complete = true;
      state_.success = true;
    }
  }
  state_.done = out.reward.events.terminal();
  out.done = state_.done;
  out.obs = observe();
  return out;
}

BodyState route_start_pose(const Route& route, std::uint64_t seed, double jitter) {
  route.validate();
  BodyState b;
  b.pos = route.waypoints.front();
  double h = heading_for_travel(direction_angle(route.start_direction()));
  if (route.randomize_heading && jitter > 0.0) {
    std::mt19937_64 rng(seed);
    h = wrap_angle(h + std::uniform_real_distribution<double>(-jitter, jitter)(rng));
  }
  b.heading = h;
  return b;
}

PolicyAction plan_subgoal_strike(const HybridEngine& engine, const ShapeSpec& shape,
                                 const ImpactorSpec& impactor, const BodyState& pose,
                                 const SubGoal& goal, const CmaConfig& cfg) {
  const Vec2 to_goal = goal.pos - pose.pos;
  const double off = wrap_angle(direction_angle(to_goal) - travel_direction(pose.heading));
  if (to_goal.norm() > 0.0 && std::abs(off) > kPi / 2) {
    fail(ErrorCode::kNoFeasibleStrike, "sub-goal lies behind the strikeable side");
  }
  SearchObjective obj;
  obj.target_pos = goal.pos;
  obj.target_heading = heading_for_travel(goal.heading);
  obj.engine = &engine;
  obj.shape = shape;
  obj.impactor = impactor;
  obj.start = pose;
  const PlanResult r = plan_strike(obj, cfg);
  return {r.best_spec, false, r.best_loss};
}

PolicyAction greedy_subgoal_policy(const HybridEngine& engine, const ShapeSpec& shape,
                                   const ImpactorSpec& impactor, const BodyState& pose,
                                   const SubGoal& goal, const CmaConfig& cfg) {
  try {
    return plan_subgoal_strike(engine, shape, impactor, pose, goal, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoFeasibleStrike) throw;
  }
  // Turn toward the sub-goal while holding position.
  SearchObjective obj;
  obj.target_pos = pose.pos;
  obj.target_heading = heading_for_travel(direction_angle(goal.pos - pose.pos));
  obj.tau = 1.0;
  obj.engine = &engine;
  obj.shape = shape;
  obj.impactor = impactor;
  obj.start = pose;
  const PlanResult r = plan_strike(obj, cfg);
  return {r.best_spec, true, r.best_loss};
}

void RouteRunConfig::validate() const {
  if (trials < 1) fail(ErrorCode::kConfig, "trials must be at least 1");
  if (!(heading_jitter >= 0.0)) fail(ErrorCode::kConfig, "heading jitter must be non-negative");
  reward.validate();
  planner.validate();
}

RouteResult run_route(const HybridEngine& policy, const HybridEngine& eval,
                      const ShapeSpec& shape, const ImpactorSpec& impactor, const Route& route,
                      const RouteRunConfig& cfg) {
  cfg.validate();
  route.validate();
  const double t0 = monotonic_seconds();
  RouteResult res;
  res.route_id = route.id;
  res.policy_engine = std::string(collision_model_name(policy.model()));
  res.trials = cfg.trials;
  res.segments = static_cast<int>(segment_route(route).size());
  res.logs.resize(cfg.trials);

  parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t i) {
    const std::uint64_t trial_seed = substream_seed(cfg.seed, i);
    const HybridEngine* exec = &eval;
    HybridEngine reseeded = eval;
    if (cfg.reseed_reality && eval.model() == CollisionModel::kRealProxy) {
      RealityConfig rc = eval.reality();
      rc.seed = substream_seed(trial_seed, 1);
      reseeded = HybridEngine::real_proxy(eval.shape(), rc, eval.solver());
      reseeded.slide_horizon = eval.slide_horizon;
      exec = &reseeded;
    }
    TaskEnv env(*exec, shape, impactor, route, cfg.reward);
    TrialLog& log = res.logs[i];
    log.trial = static_cast<int>(i);
    log.seed = trial_seed;
    log.start = route_start_pose(route, substream_seed(trial_seed, 0), cfg.heading_jitter);
    env.reset(log.start);

    CmaConfig pc = cfg.planner;
    pc.parallel = false;  // trials already run in parallel
    while (!env.state().done) {
      const EpisodeState before = env.state();
      pc.seed = substream_seed(trial_seed, 2 + static_cast<std::uint64_t>(before.total_strikes));
      const PolicyAction act =
          greedy_subgoal_policy(policy, shape, impactor, before.pose, env.current_goal(), pc);
      const StepResult step = env.step(act.spec);
      StrikeLog s;
      s.index = before.total_strikes;
      s.segment = before.segment;
      s.t = before.strikes + 1;
      s.plan_seed = pc.seed;
      s.spec = act.spec;
      s.reorient = act.reorient;
      s.resting = step.outcome.resting;
      s.reward = step.reward;
      log.strikes.push_back(s);
    }
    log.success = env.state().success;
    log.completed_segments = env.state().completed;
    log.total_reward = env.state().cumulative_reward;
  });

  for (const TrialLog& log : res.logs) {
    res.successes += log.success ? 1 : 0;
    res.completed_segments += log.completed_segments;
  }
  res.sr = static_cast<double>(res.successes) / res.trials;
  res.sgcr = static_cast<double>(res.completed_segments) / (res.segments * res.trials);
  res.wall_clock = monotonic_seconds() - t0;
  return res;
}

std::string route_log_jsonl(const RouteResult& result) {
  std::ostringstream out;
  for (const TrialLog& log : result.logs) {
    for (const StrikeLog& s : log.strikes) {
      json j;
      j["route"] = result.route_id;
      j["policy"] = result.policy_engine;
      j["trial"] = log.trial;
      j["seed"] = log.seed;
      j["strike"] = s.index;
      j["segment"] = s.segment;
      j["t"] = s.t;
      j["plan_seed"] = s.plan_seed;
      j["spec"] = {s.spec.speed, s.spec.point_param, s.spec.deflection};
      j["reorient"] = s.reorient;
      j["resting"] = {s.resting.pos.x(), s.resting.pos.y(), s.resting.heading};
      j["reward"] = {{"r1", s.reward.terms.r1},
                     {"r2", s.reward.terms.r2},
                     {"r3", s.reward.terms.r3},
                     {"r4", s.reward.terms.r4},
                     {"total", s.reward.terms.total()}};
      j["dx"] = s.reward.distance;
      j["dtheta"] = s.reward.heading_error;
      json ev = json::array();
      if (s.reward.events.reached) ev.push_back("reached");
      if (s.reward.events.exited) ev.push_back("exited");
      if (s.reward.events.budget_exhausted) ev.push_back("budget_exhausted");
      if (s.reward.events.route_complete) ev.push_back("route_complete");
      j["events"] = ev;
      out << j.dump() << '\n';
    }
  }
  return out.str();
}

}  // namespace impactlab
