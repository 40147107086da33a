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

#include "impactlab/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace impactlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or_inf(double v) { return std::isnan(v) ? kInf : v; }

// Restores the thread cap on scope exit.
class ThreadCap {
 public:
  explicit ThreadCap(unsigned n) : saved_(max_threads()) { set_max_threads(n); }
  ~ThreadCap() { set_max_threads(saved_); }
  ThreadCap(const ThreadCap&) = delete;
  ThreadCap& operator=(const ThreadCap&) = delete;

 private:
  unsigned saved_;
};

}  // namespace

int default_population(int dim) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

void CmaConfig::validate() const {
  if (dim < 1) fail(ErrorCode::kConfig, "CMA-ES dimension must be positive");
  if (lambda != 0 && lambda < 2) fail(ErrorCode::kConfig, "CMA-ES population must be >= 2");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) {
    fail(ErrorCode::kConfig, "CMA-ES sigma0 must be positive");
  }
  if (max_evals < 1) fail(ErrorCode::kConfig, "CMA-ES max_evals must be positive");
  if (f_tol < 0.0 || x_tol < 0.0) fail(ErrorCode::kConfig, "CMA-ES tolerances must be >= 0");
  if (max_resamples < 0 || penalty_weight < 0.0) {
    fail(ErrorCode::kConfig, "CMA-ES boundary settings must be >= 0");
  }
  const bool has_bounds = lo.size() > 0 || hi.size() > 0;
  if (has_bounds) {
    if (lo.size() != dim || hi.size() != dim) fail(ErrorCode::kConfig, "CMA-ES bounds size");
    for (int i = 0; i < dim; ++i) {
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i])) {
        fail(ErrorCode::kConfig, "CMA-ES bounds must be finite with lo < hi");
      }
    }
  }
  if (mean0.size() != 0 && mean0.size() != dim) fail(ErrorCode::kConfig, "CMA-ES mean0 size");
}

std::string_view cma_stop_name(CmaStop stop) {
  switch (stop) {
    case CmaStop::kMaxEvals:
      return "max_evals";
    case CmaStop::kFunTol:
      return "f_tol";
    case CmaStop::kSigmaCollapse:
      return "sigma_collapse";
  }
  return "?";
}

CmaResult cma_es(const CmaConfig& cfg, const std::function<double(const Eigen::VectorXd&)>& f) {
  cfg.validate();
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int n = cfg.dim;
  const int lambda = cfg.lambda > 0 ? cfg.lambda : default_population(n);
  const VectorXd lo = cfg.lo.size() ? cfg.lo : VectorXd::Zero(n);
  const VectorXd hi = cfg.hi.size() ? cfg.hi : VectorXd::Ones(n);

  // Strategy constants from the canonical tutorial.
  const int mu = lambda / 2;
  VectorXd w(mu);
  for (int i = 0; i < mu; ++i) w[i] = std::log(lambda / 2.0 + 0.5) - std::log(i + 1.0);
  w /= w.sum();
  const double mueff = 1.0 / w.squaredNorm();
  const double dn = n;
  const double cc = (4.0 + mueff / dn) / (dn + 4.0 + 2.0 * mueff / dn);
  const double cs = (mueff + 2.0) / (dn + mueff + 5.0);
  const double c1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + mueff);
  const double cmu =
      std::min(1.0 - c1, 2.0 * (0.25 + mueff - 2.0 + 1.0 / mueff) /
                             ((dn + 2.0) * (dn + 2.0) + mueff));
  const double damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (dn + 1.0)) - 1.0) + cs;
  const double chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));
  const int hist_len = 10 + static_cast<int>(std::ceil(30.0 * dn / lambda));

  VectorXd m = cfg.mean0.size() ? cfg.mean0 : VectorXd(0.5 * (lo + hi));
  m = m.cwiseMax(lo).cwiseMin(hi);
  double sigma = cfg.sigma0;
  MatrixXd C = MatrixXd::Identity(n, n);
  MatrixXd B = MatrixXd::Identity(n, n);
  VectorXd D = VectorXd::Ones(n);
  VectorXd pc = VectorXd::Zero(n);
  VectorXd ps = VectorXd::Zero(n);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  CmaResult res;
  res.best_x = m;
  res.best_f = kInf;
  std::deque<double> gen_best;

  MatrixXd arx(n, lambda);
  MatrixXd arc(n, lambda);  // clamped
  VectorXd penalty(lambda), fvals(lambda), fit(lambda);

  while (res.evals + lambda <= cfg.max_evals) {
    for (int k = 0; k < lambda; ++k) {
      VectorXd x(n);
      for (int attempt = 0; attempt <= cfg.max_resamples; ++attempt) {
        VectorXd z(n);
        for (int i = 0; i < n; ++i) z[i] = normal(rng);
        x = m + sigma * (B * D.cwiseProduct(z));
        if ((x.array() >= lo.array()).all() && (x.array() <= hi.array()).all()) break;
      }
      arx.col(k) = x;
      arc.col(k) = x.cwiseMax(lo).cwiseMin(hi);
      penalty[k] = cfg.penalty_weight * (x - arc.col(k)).squaredNorm();
    }
    auto eval_one = [&](std::size_t k) {
      fvals[static_cast<Eigen::Index>(k)] = finite_or_inf(f(arc.col(static_cast<Eigen::Index>(k))));
    };
    if (cfg.parallel) {
      parallel_for(static_cast<std::size_t>(lambda), eval_one);
    } else {
      for (int k = 0; k < lambda; ++k) eval_one(static_cast<std::size_t>(k));
    }
    res.evals += lambda;
    ++res.generations;

    double this_best = kInf;
    for (int k = 0; k < lambda; ++k) {
      fit[k] = fvals[k] + penalty[k];
      this_best = std::min(this_best, fvals[k]);
      if (fvals[k] < res.best_f) {
        res.best_f = fvals[k];
        res.best_x = arc.col(k);
      }
    }
    res.best_history.push_back(res.best_f);

    std::vector<int> idx(lambda);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fit[a] < fit[b]; });

    const VectorXd m_old = m;
    m.setZero();
    for (int i = 0; i < mu; ++i) m += w[i] * arx.col(idx[i]);
    const VectorXd y_w = (m - m_old) / sigma;
    const MatrixXd c_inv_sqrt = B * D.cwiseInverse().asDiagonal() * B.transpose();
    ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mueff) * (c_inv_sqrt * y_w);
    const double ps_norm = ps.norm();
    const bool hsig = ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * res.generations)) /
                          chi_n <
                      1.4 + 2.0 / (dn + 1.0);
    pc = (1.0 - cc) * pc + (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * y_w;
    MatrixXd rank_mu = MatrixXd::Zero(n, n);
    for (int i = 0; i < mu; ++i) {
      const VectorXd yi = (arx.col(idx[i]) - m_old) / sigma;
      rank_mu += w[i] * yi * yi.transpose();
    }
    C = (1.0 - c1 - cmu) * C +
        c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * C) + cmu * rank_mu;
    sigma *= std::exp((cs / damps) * (ps_norm / chi_n - 1.0));

    C = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(C);
    B = eig.eigenvectors();
    D = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();

    if (std::isfinite(this_best)) {
      gen_best.push_back(this_best);
      if (static_cast<int>(gen_best.size()) > hist_len) gen_best.pop_front();
    }

    if (cfg.x_tol > 0.0 && sigma * D.maxCoeff() < cfg.x_tol) {
      res.stop = CmaStop::kSigmaCollapse;
      break;
    }
    if (cfg.f_tol > 0.0 && static_cast<int>(gen_best.size()) == hist_len) {
      const auto [hmin, hmax] = std::minmax_element(gen_best.begin(), gen_best.end());
      const double gmin = fvals.minCoeff(), gmax = fvals.maxCoeff();
      if (*hmax - *hmin < cfg.f_tol && std::isfinite(gmax) && gmax - gmin < cfg.f_tol) {
        res.stop = CmaStop::kFunTol;
        break;
      }
    }
  }
  res.final_sigma = sigma * D.maxCoeff();
  return res;
}

double heading_error(double heading, double target, int symmetry_order, bool wrap) {
  if (!wrap || symmetry_order <= 1) return std::abs(wrap_angle(heading - target));
  const double period = 2.0 * kPi / symmetry_order;
  return std::abs(std::remainder(heading - target, period));
}

ObjectiveValue eval_objective(const SearchObjective& obj, const ImpactSpec& spec) {
  if (!obj.engine) fail(ErrorCode::kConfig, "objective has no engine");
  if (!(obj.tau >= 0.0)) fail(ErrorCode::kConfig, "tau must be non-negative");
  ObjectiveValue v;
  try {
    const StrikeOutcome o =
        strike_and_settle(*obj.engine, obj.shape, obj.impactor, obj.start, spec);
    v.resting = o.resting;
    v.collision_wall_clock = o.collision_wall_clock;
    v.total_wall_clock = o.total_wall_clock;
  } catch (const Error&) {
    v.failed = true;
    v.loss = v.pos_error = v.ori_error = kInf;
    return v;
  }
  v.pos_error = (v.resting.pos - obj.target_pos).norm();
  v.ori_error = heading_error(v.resting.heading, obj.target_heading,
                              obj.shape.symmetry_order(), obj.symmetry_wrap);
  v.loss = v.pos_error * v.pos_error + obj.tau * v.ori_error * v.ori_error;
  return v;
}

ImpactSpec unit_to_spec(ShapeKind shape, const Eigen::VectorXd& u) {
  const SpecBox box = spec_box(shape);
  auto at = [&](int spec_axis, int unit_axis) {
    return box.lo[spec_axis] + std::clamp(u[unit_axis], 0.0, 1.0) *
                                   (box.hi[spec_axis] - box.lo[spec_axis]);
  };
  ImpactSpec s;
  s.point_param = at(1, 0);
  s.deflection = at(2, 1);
  s.speed = at(0, 2);
  return s;
}

Eigen::VectorXd spec_to_unit(ShapeKind shape, const ImpactSpec& spec) {
  const SpecBox box = spec_box(shape);
  auto frac = [&](double v, int axis) { return (v - box.lo[axis]) / (box.hi[axis] - box.lo[axis]); };
  Eigen::VectorXd u(3);
  u << frac(spec.point_param, 1), frac(spec.deflection, 2), frac(spec.speed, 0);
  return u;
}

PlanResult plan_strike(const SearchObjective& obj, CmaConfig cfg,
                       const HybridEngine* eval_engine) {
  if (!obj.engine) fail(ErrorCode::kConfig, "objective has no engine");
  cfg.dim = 3;
  cfg.lo = Eigen::VectorXd::Zero(3);
  cfg.hi = Eigen::VectorXd::Ones(3);
  const ShapeKind kind = obj.shape.kind;

  std::mutex mu;
  double collision = 0.0;
  const double t0 = monotonic_seconds();
  PlanResult out;
  out.search = cma_es(cfg, [&](const Eigen::VectorXd& u) {
    const ObjectiveValue v = eval_objective(obj, unit_to_spec(kind, u));
    std::lock_guard<std::mutex> lock(mu);
    collision += v.collision_wall_clock;
    return v.loss;
  });
  out.wall_clock = monotonic_seconds() - t0;
  out.collision_wall_clock = collision;
  out.evals = out.search.evals;
  out.best_spec = unit_to_spec(kind, out.search.best_x);
  out.best_loss = out.search.best_f;

  SearchObjective replay = obj;
  if (eval_engine) replay.engine = eval_engine;
  const ObjectiveValue v = eval_objective(replay, out.best_spec);
  out.pos_error = v.pos_error;
  out.ori_error = v.ori_error;
  out.executed_pose = v.resting;
  return out;
}

std::vector<PlanTarget> reachable_targets(const HybridEngine& engine, const ShapeSpec& shape,
                                          const ImpactorSpec& impactor, const BodyState& start,
                                          int n, std::uint64_t seed) {
  if (n < 1) fail(ErrorCode::kConfig, "need at least one target");
  // Well inside the box so the optimum is not on a boundary.
  const SpecBox box = spec_box(shape.kind).shrunk(0.1);
  std::vector<PlanTarget> out;
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(substream_seed(seed, static_cast<std::uint64_t>(i)));
    std::array<double, 3> a;
    for (int k = 0; k < 3; ++k) {
      a[k] = std::uniform_real_distribution<double>(box.lo[k], box.hi[k])(rng);
    }
    const StrikeOutcome o =
        strike_and_settle(engine, shape, impactor, start, ImpactSpec::from_array(a));
    out.push_back({o.resting.pos, o.resting.heading});
  }
  return out;
}

BenchStats mean_std(const std::vector<double>& xs) {
  BenchStats s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

BenchReport bench_search_time(const HybridEngine& full, const HybridEngine& hybrid,
                              const ShapeSpec& shape, const ImpactorSpec& impactor,
                              const BodyState& start, const std::vector<PlanTarget>& targets,
                              const CmaConfig& cfg, const HybridEngine* eval_engine) {
  if (targets.empty()) fail(ErrorCode::kConfig, "benchmark needs targets");
  ThreadCap single(1);
  BenchReport report;
  std::vector<double> wall[2], coll[2];
  const HybridEngine* engines[2] = {&full, &hybrid};
  for (std::size_t t = 0; t < targets.size(); ++t) {
    for (int e = 0; e < 2; ++e) {
      SearchObjective obj;
      obj.target_pos = targets[t].pos;
      obj.target_heading = targets[t].heading;
      obj.engine = engines[e];
      obj.shape = shape;
      obj.impactor = impactor;
      obj.start = start;
      CmaConfig c = cfg;
      c.seed = substream_seed(cfg.seed, t);
      c.f_tol = 0.0;
      c.x_tol = 0.0;
      c.parallel = false;
      const PlanResult r = plan_strike(obj, c, eval_engine);
      BenchRow row;
      row.shape = std::string(shape_name(shape.kind));
      row.engine = std::string(collision_model_name(engines[e]->model()));
      row.target_id = static_cast<int>(t);
      row.seed = c.seed;
      row.evals = r.evals;
      row.wall_clock_s = r.wall_clock;
      row.collision_wall_clock_s = r.collision_wall_clock;
      row.pos_err_m = r.pos_error;
      row.ori_err_rad = r.ori_error;
      report.rows.push_back(row);
      wall[e].push_back(r.wall_clock);
      coll[e].push_back(r.collision_wall_clock);
    }
  }
  report.full_wall_clock = mean_std(wall[0]);
  report.hybrid_wall_clock = mean_std(wall[1]);
  report.full_collision_wall_clock = mean_std(coll[0]);
  report.hybrid_collision_wall_clock = mean_std(coll[1]);
  report.reduction_pct = report.full_wall_clock.mean > 0.0
                             ? 100.0 * (1.0 - report.hybrid_wall_clock.mean /
                                                  report.full_wall_clock.mean)
                             : 0.0;
  return report;
}

std::string bench_rows_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os.precision(9);
  os << "shape,engine,target_id,seed,evals,wall_clock_s,collision_wall_clock_s,pos_err_m,"
        "ori_err_rad\n";
  for (const BenchRow& r : rows) {
    os << r.shape << ',' << r.engine << ',' << r.target_id << ',' << r.seed << ',' << r.evals
       << ',' << r.wall_clock_s << ',' << r.collision_wall_clock_s << ',' << r.pos_err_m << ','
       << r.ori_err_rad << '\n';
  }
  return os.str();
}

}  // namespace impactlab
