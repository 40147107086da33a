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

// Derivative-free strike planning: a (mu/mu_w, lambda) CMA-ES, the resting
// pose objective it minimizes, and the search-time benchmark.

#ifndef IMPACTLAB_PLANNER_HPP_
#define IMPACTLAB_PLANNER_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "impactlab/hybrid.hpp"

namespace impactlab {

// 4 + floor(3 ln n).
int default_population(int dim);

struct CmaConfig {
  int dim = 3;
  int lambda = 0;  // 0 picks default_population(dim)
  Eigen::VectorXd mean0;  // empty: centre of the bounds
  double sigma0 = 0.3;
  long max_evals = 700;
  // Stop once the best values of recent generations and all values of the
  // current one lie within f_tol of each other. 0 disables.
  double f_tol = 1e-6;
  // Stop once sigma times the largest axis of C falls below this. 0 disables.
  double x_tol = 1e-12;
  std::uint64_t seed = 0;
  Eigen::VectorXd lo;  // empty: [0, 1]^dim
  Eigen::VectorXd hi;
  int max_resamples = 10;
  double penalty_weight = 1.0;  // on the squared clamp distance
  // Evaluate each generation with parallel_for.
  bool parallel = true;

  void validate() const;  // kConfig
};

enum class CmaStop { kMaxEvals, kFunTol, kSigmaCollapse };
std::string_view cma_stop_name(CmaStop stop);

struct CmaResult {
  Eigen::VectorXd best_x;  // always inside the bounds
  double best_f = 0.0;
  long evals = 0;
  int generations = 0;
  double final_sigma = 0.0;  // sigma times the largest axis of C
  CmaStop stop = CmaStop::kMaxEvals;
  std::vector<double> best_history;  // best-so-far after each generation
};

// Objective values may be +inf for failed evaluations. Every evaluation
// happens at a point inside the bounds.
CmaResult cma_es(const CmaConfig& cfg, const std::function<double(const Eigen::VectorXd&)>& f);

struct SearchObjective {
  Vec2 target_pos = Vec2::Zero();
  double target_heading = 0.0;
  double tau = 0.01;
  // Compare headings modulo the shape's rotational symmetry; the raw angle
  // difference is used otherwise.
  bool symmetry_wrap = true;
  const HybridEngine* engine = nullptr;
  ShapeSpec shape;
  ImpactorSpec impactor;
  BodyState start;
};

struct ObjectiveValue {
  double loss = 0.0;
  double pos_error = 0.0;
  double ori_error = 0.0;
  bool failed = false;  // engine error, loss is +inf
  double collision_wall_clock = 0.0;
  double total_wall_clock = 0.0;
  BodyState resting;
};

// Heading error in [0, pi/k] for symmetry order k (or [0, pi] raw).
double heading_error(double heading, double target, int symmetry_order, bool wrap = true);

// |pos - target|^2 + tau * heading_error^2 after one strike from obj.start.
ObjectiveValue eval_objective(const SearchObjective& obj, const ImpactSpec& spec);

// Unit-cube coordinates (point_param, deflection, speed) over the shape's
// spec box.
ImpactSpec unit_to_spec(ShapeKind shape, const Eigen::VectorXd& u);
Eigen::VectorXd spec_to_unit(ShapeKind shape, const ImpactSpec& spec);

struct PlanResult {
  ImpactSpec best_spec;
  double best_loss = 0.0;  // on the planning engine
  // Errors after executing best_spec on the evaluation engine (the planning
  // engine when none is given).
  double pos_error = 0.0;
  double ori_error = 0.0;
  BodyState executed_pose;
  long evals = 0;
  double wall_clock = 0.0;
  double collision_wall_clock = 0.0;  // summed over evaluations
  CmaResult search;
};

// Searches the spec box with CMA-ES in unit coordinates; the config's bounds
// and dim are overridden.
PlanResult plan_strike(const SearchObjective& obj, CmaConfig cfg,
                       const HybridEngine* eval_engine = nullptr);

struct PlanTarget {
  Vec2 pos = Vec2::Zero();
  double heading = 0.0;
};

// Resting poses of random strikes from `start`, so every target is reachable.
std::vector<PlanTarget> reachable_targets(const HybridEngine& engine, const ShapeSpec& shape,
                                          const ImpactorSpec& impactor, const BodyState& start,
                                          int n, std::uint64_t seed);

struct BenchRow {
  std::string shape;
  std::string engine;
  int target_id = 0;
  std::uint64_t seed = 0;
  long evals = 0;
  double wall_clock_s = 0.0;
  double collision_wall_clock_s = 0.0;
  double pos_err_m = 0.0;
  double ori_err_rad = 0.0;
};

struct BenchStats {
  double mean = 0.0;
  double std = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  BenchStats full_wall_clock;
  BenchStats hybrid_wall_clock;
  BenchStats full_collision_wall_clock;
  BenchStats hybrid_collision_wall_clock;
  double reduction_pct = 0.0;  // 100 * (1 - hybrid / full) on the means
};

BenchStats mean_std(const std::vector<double>& xs);

// Runs the same CMA-ES (budget, seeds) against every target on both engines,
// single-threaded. Early termination is disabled so both use the full budget.
// Errors are measured on eval_engine when given.
BenchReport bench_search_time(const HybridEngine& full, const HybridEngine& hybrid,
                              const ShapeSpec& shape, const ImpactorSpec& impactor,
                              const BodyState& start, const std::vector<PlanTarget>& targets,
                              const CmaConfig& cfg, const HybridEngine* eval_engine = nullptr);

std::string bench_rows_csv(const std::vector<BenchRow>& rows);

}  // namespace impactlab

#endif  // IMPACTLAB_PLANNER_HPP_
