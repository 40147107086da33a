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

// Acceptance harness. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Seeds and tolerances are fixed here.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "impactlab/lab.hpp"
#include "json.hpp"

namespace {

using namespace impactlab;
using nlohmann::json;
namespace fs = std::filesystem;

// ---- Tolerances --------------------------------------------------------------

constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-4;
constexpr int kFdTriples = 100;
constexpr int kFdWeightsPerTriple = 1500;
constexpr double kFdBudgetS = 10.0;
// Triples with a hidden pre-activation closer than this to a ReLU kink are
// redrawn; a central difference across the kink measures a one-sided slope.
constexpr double kKinkMargin = 1e-4;

constexpr double kRestitutionTol = 0.02;
constexpr double kSlideTol = 0.01;
constexpr double kPhysicsBudgetS = 30.0;

constexpr double kE1RelTol = 0.10;
constexpr int kE1MinPasses = 9;
constexpr double kJointLossRatio = 10.0;
constexpr double kIdentBudgetS = 300.0;

constexpr double kAlpha = 0.1;
constexpr double kMinReductionPct = 25.0;

constexpr double kSphereTol = 1e-6;
constexpr long kSphereEvals = 600;

constexpr double kRouteBudgetS = 600.0;

constexpr std::uint64_t kReferenceSeed = 0;

// ---- Reporting ---------------------------------------------------------------

struct Line {
  int id = 0;
  bool pass = false;
  std::string name;
  std::string detail;
  double seconds = 0.0;
};

std::vector<Line> g_lines;

void record(int id, const std::string& name, bool pass, const std::string& detail, double t0) {
  Line l{id, pass, name, detail, monotonic_seconds() - t0};
  std::printf("criterion %2d %-28s %s  (%.1fs)  %s\n", l.id, l.name.c_str(),
              l.pass ? "PASS" : "FAIL", l.seconds, l.detail.c_str());
  std::fflush(stdout);
  g_lines.push_back(std::move(l));
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1: gradient fidelity -------------------------------------------------------

double rel_err(double a, double b, double loss) {
  // Absolute floor at central-difference round-off, about 1e-16 * loss / h.
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-5 * std::max(1.0, loss)});
}

Mlp random_model(std::mt19937_64& rng, bool feature_maps) {
  Mlp m = init_model(rng());
  m.per_speed_output = feature_maps;
  m.log_damping_inputs = feature_maps;
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> pos(0.2, 2.0);
  for (int l = 0; l < m.num_layers(); ++l)
    for (Eigen::Index i = 0; i < m.bias(l).size(); ++i) m.bias(l)(i) = 0.1 * n01(rng);
  for (Eigen::Index i = 0; i < kInputDim; ++i) {
    m.input_norm.mean(i) = 0.5 * n01(rng);
    m.input_norm.scale(i) = pos(rng);
  }
  for (Eigen::Index i = 0; i < kOutputDim; ++i) {
    m.output_norm.mean(i) = 0.2 * n01(rng);
    m.output_norm.scale(i) = pos(rng);
  }
  return m;
}

SurrogateInput random_input(std::mt19937_64& rng, ShapeKind kind) {
  const SpecBox sb = spec_box(kind);
  const ParamBox pb = param_box();
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  SurrogateInput in;
  in.spec = {u(sb.lo[0], sb.hi[0]), u(sb.lo[1], sb.hi[1]), u(sb.lo[2], sb.hi[2])};
  in.params = {u(pb.lo[0], pb.hi[0]), u(pb.lo[1], pb.hi[1]), u(pb.lo[2], pb.hi[2]),
               u(pb.lo[3], pb.hi[3])};
  return in;
}

// Smallest |pre-activation| over the hidden units.
double kink_distance(const Mlp& m, const SurrogateInput& in) {
  Eigen::MatrixXd x(kInputDim, 1);
  x.col(0) = in.to_vector();
  Eigen::VectorXd a = m.input_norm.normalize(scaler_inputs(m, x).col(0));
  double d = INFINITY;
  for (int l = 0; l + 1 < m.num_layers(); ++l) {
    const Eigen::VectorXd z = m.weight(l) * a + m.bias(l);
    d = std::min(d, z.cwiseAbs().minCoeff());
    a = z.cwiseMax(0.0);
  }
  return d;
}

void criterion_gradients() {
  const double t0 = monotonic_seconds();
  std::mt19937_64 rng(1001);
  double worst_w = 0.0, worst_p = 0.0;
  long checked = 0;
  int redrawn = 0;
  for (int trial = 0; trial < kFdTriples; ++trial) {
    const ShapeKind kind = static_cast<ShapeKind>(trial % 3);
    Mlp m = random_model(rng, trial % 2 == 1);
    SurrogateInput in = random_input(rng, kind);
    while (kink_distance(m, in) < kKinkMargin) {
      in = random_input(rng, kind);
      ++redrawn;
    }
    const SurrogateInput y_in = random_input(rng, kind);
    const PostImpact y = forward(random_model(rng, false), y_in);
    auto loss = [&](const Mlp& mm, const SurrogateInput& x) {
      return (forward(mm, x.to_vector()) - to_vector(y)).squaredNorm();
    };
    const double l0 = loss(m, in);

    const auto gp = backward_params(m, in, y);
    for (int k = 0; k < 4; ++k) {
      auto p = in.params.to_array();
      SurrogateInput up = in, dn = in;
      p[k] += kFdStep;
      up.params = ContactParams::from_array(p);
      p[k] -= 2 * kFdStep;
      dn.params = ContactParams::from_array(p);
      const double fd = (loss(m, up) - loss(m, dn)) / (2 * kFdStep);
      worst_p = std::max(worst_p, rel_err(gp[k], fd, l0));
      ++checked;
    }

    // Stratified over layers: every layer contributes in proportion to size,
    // and the first and last entries of the parameter vector always appear.
    const Eigen::VectorXd gw = backward_weights(m, in, y);
    const Eigen::Index n = m.num_params();
    std::vector<Eigen::Index> idx{0, n - 1};
    const Eigen::Index stride = n / kFdWeightsPerTriple;
    for (int s = 0; s < kFdWeightsPerTriple - 2; ++s) {
      idx.push_back(s * stride + std::uniform_int_distribution<Eigen::Index>(0, stride - 1)(rng));
    }
    for (Eigen::Index k : idx) {
      const double w = m.params()(k);
      m.params()(k) = w + kFdStep;
      const double up = loss(m, in);
      m.params()(k) = w - kFdStep;
      const double dn = loss(m, in);
      m.params()(k) = w;
      worst_w = std::max(worst_w, rel_err(gw(k), (up - dn) / (2 * kFdStep), l0));
      ++checked;
    }
  }
  const double dt = monotonic_seconds() - t0;
  const bool pass = worst_w < kFdRelTol && worst_p < kFdRelTol && dt < kFdBudgetS;
  record(1, "gradient fidelity", pass,
         fmt("%d triples (%d redrawn near a ReLU kink), %ld derivatives; max rel err weights "
             "%.2e params %.2e (tol %.0e); %.1fs (budget %.0fs)",
             kFdTriples, redrawn, checked, worst_w, worst_p, kFdRelTol, dt, kFdBudgetS),
         t0);
}

// ---- 2: physics oracles -----------------------------------------------------------

void criterion_physics() {
  const double t0 = monotonic_seconds();
  const ShapeSpec disc = default_shape(ShapeKind::kSemiDisc);
  double worst_imp = 0.0;
  int combos = 0;
  // Head-on apex strike with both friction coefficients zero: the two-body
  // law along the normal.
  for (double m_imp : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    for (double damping : {0.0, 0.4}) {
      ImpactorSpec imp;
      imp.mass = m_imp;
      const double e = damping_to_restitution(damping);
      const double v = 0.5;
      const double expect = (1.0 + e) * m_imp / (m_imp + disc.mass) * v;
      const PostImpact p =
          solve_impact_full(disc, imp, {v, kPi / 2, 0.0}, {0.0, 0.0, damping, 0.5});
      worst_imp = std::max(worst_imp, std::abs(p.vn - expect) / expect);
      ++combos;
    }
  }

  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> mu(0.02, 1.0), speed(0.05, 1.5);
  double worst_t = 0.0, worst_d = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double m2 = mu(rng), v0 = speed(rng);
    BodyState start;
    start.lin_vel = {v0, 0.0};
    const Trajectory t = slide_to_rest(disc, start, {0.5, m2, 0.5, 0.5}, 20.0);
    const double t_stop = v0 / (m2 * 9.81);
    const double d_stop = v0 * v0 / (2 * m2 * 9.81);
    // The integrator stops on a 1 ms grid, so time is compared with that floor.
    worst_t = std::max(worst_t, std::max(std::abs(t.duration() - t_stop) - 1e-3, 0.0) / t_stop);
    worst_d = std::max(worst_d, std::abs((t.back().pos - start.pos).norm() - d_stop) / d_stop);
  }
  const double dt = monotonic_seconds() - t0;
  const bool pass = worst_imp < kRestitutionTol && worst_t < kSlideTol && worst_d < kSlideTol &&
                    dt < kPhysicsBudgetS;
  record(2, "physics oracle agreement", pass,
         fmt("head-on %d combos max rel err %.2e (tol %.0e); slide 20 draws time %.2e "
             "distance %.2e (tol %.0e)",
             combos, worst_imp, kRestitutionTol, worst_t, worst_d, kSlideTol),
         t0);
}

// ---- 3: identifiability ------------------------------------------------------------

void criterion_identifiability() {
  const double t0 = monotonic_seconds();
  const ShapeSpec shape = default_shape(ShapeKind::kSemiDisc);
  const ImpactorSpec imp;
  const RealityConfig real = RealityConfig::ideal(RealityConfig{}.hidden_params);
  const ContactParams truth = real.hidden_params;
  const ContactParams mid = box_midpoint();

  int e1_pass = 0, ratio_pass = 0;
  double min_ratio = INFINITY;
  std::string e1s;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SeedStreams s(seed);
    const Dataset d_sim = generate_sim_dataset(shape, imp, 20000, substream_seed(s.data, 0));
    const Mlp model = pretrain(init_surrogate(d_sim, s.init), d_sim).first;
    const Dataset d_train = generate_real_dataset(real, shape, imp, 10, substream_seed(s.data, 1));

    // e1 alone, the other three pinned at their hidden values.
    ContactParams start = truth;
    start.e1 = mid.e1;
    IdentifyConfig one;
    one.free = {false, false, true, false};
    const ContactParams p = identify_params(model, d_train, BoxReparam::from_params(start), one).first;
    const bool ok = std::abs(p.e1 - truth.e1) <= kE1RelTol * truth.e1;
    e1_pass += ok;
    e1s += fmt("%s%.3f", e1s.empty() ? "" : " ", p.e1);

    // All four free from the midpoint.
    const auto [q, rep] = identify_params(model, d_train, BoxReparam::midpoint(), IdentifyConfig{});
    const double ratio = rep.initial_loss / std::max(rep.final_loss, 1e-300);
    min_ratio = std::min(min_ratio, ratio);
    ratio_pass += ratio >= kJointLossRatio;
  }
  const double dt = monotonic_seconds() - t0;
  const bool pass = e1_pass >= kE1MinPasses && ratio_pass == 10 && dt < kIdentBudgetS;
  record(3, "identifiability", pass,
         fmt("e1 within %.0f%% of %.3f on %d/10 seeds (need %d) [%s]; joint loss reduction min "
             "%.1fx on %d/10 (need 10 at %.0fx); %.0fs (budget %.0fs)",
             100 * kE1RelTol, truth.e1, e1_pass, kE1MinPasses, e1s.c_str(), min_ratio, ratio_pass,
             kJointLossRatio, dt, kIdentBudgetS),
         t0);
}

// ---- Pipeline runs for 4-7, 9, 10 -------------------------------------------------

struct ShapeRun {
  std::string shape;
  std::map<std::string, double> acc;  // model -> Accuracy(0.1)
  double plan_hybrid = 0.0, plan_full = 0.0;
  json bench;
  json route;
  double route_seconds = 0.0;
  std::vector<double> best_history_violations;
};

json read_json(const RunConfig& cfg, const char* file) {
  return json::parse(read_text_file(out_path(cfg, file)));
}

RunConfig shape_config(ShapeKind kind, const fs::path& dir) {
  RunConfig cfg;
  cfg.shape = default_shape(kind);
  cfg.seed = kReferenceSeed;
  cfg.alphas = {kAlpha};
  cfg.out_dir = dir.string();
  return cfg;
}

void run_pipeline(const RunConfig& cfg, bool with_route) {
  lab_gen_data(cfg, DataOrigin::kSim);
  lab_gen_data(cfg, DataOrigin::kRealProxy);
  lab_train(cfg, false);
  lab_eval(cfg);
  lab_plan(cfg);
  lab_bench(cfg);
  if (with_route) lab_route(cfg);
}

ShapeRun collect(const RunConfig& cfg, bool with_route) {
  ShapeRun r;
  r.shape = std::string(shape_name(cfg.shape.kind));
  const json eval = read_json(cfg, "report_eval.json");
  for (const json& row : eval.at("rows")) {
    if (std::abs(row.at("alpha").get<double>() - kAlpha) < 1e-12) {
      r.acc[row.at("model").get<std::string>()] = row.at("accuracy").get<double>();
    }
  }
  const json plan = read_json(cfg, "report_plan.json").at("summary");
  r.plan_hybrid = plan.at("hybrid").at("pos_err_m").at("mean").get<double>();
  r.plan_full = plan.at("full").at("pos_err_m").at("mean").get<double>();
  r.bench = read_json(cfg, "report_bench.json");
  if (with_route) r.route = read_json(cfg, "report_route.json");
  return r;
}

void criterion_overfit(const std::vector<ShapeRun>& runs, double t0) {
  bool pass = true;
  std::string detail;
  for (const ShapeRun& r : runs) {
    const double fin = r.acc.at("final"), lng = r.acc.at("finetune_long"), ro = r.acc.at("real_only");
    const bool ok = fin >= lng && fin > ro;
    pass = pass && ok;
    detail += fmt("%s%s: final %.3f vs 1000-step %.3f vs real-only %.3f%s", detail.empty() ? "" : "; ",
                  r.shape.c_str(), fin, lng, ro, ok ? "" : " (x)");
  }
  record(4, "overfitting guard", pass, detail + "  [all 3 shapes required]", t0);
}

void criterion_baselines(const std::vector<ShapeRun>& runs, double t0) {
  int ok_shapes = 0;
  std::string detail;
  for (const ShapeRun& r : runs) {
    const double fin = r.acc.at("final"), grid = r.acc.at("full_grid"), ro = r.acc.at("real_only");
    const bool ok = fin >= grid && grid >= ro && (fin > grid || grid > ro);
    ok_shapes += ok;
    detail += fmt("%s%s: final %.3f >= grid %.3f >= real-only %.3f%s", detail.empty() ? "" : "; ",
                  r.shape.c_str(), fin, grid, ro, ok ? "" : " (x)");
  }
  record(5, "baseline ordering", ok_shapes >= 2, detail + fmt("  [%d/3, need 2]", ok_shapes), t0);
}

void criterion_speedup(const std::vector<ShapeRun>& runs, double t0) {
  bool pass = true;
  std::string detail;
  for (const ShapeRun& r : runs) {
    const double red = r.bench.at("reduction_pct_wall_clock").get<double>();
    pass = pass && red >= kMinReductionPct;
    detail += fmt("%s%s %.4fs -> %.4fs (%.1f%%)", detail.empty() ? "" : "; ", r.shape.c_str(),
                  r.bench.at("full_wall_clock_s").at("mean").get<double>(),
                  r.bench.at("hybrid_wall_clock_s").at("mean").get<double>(), red);
  }
  const double ref = 100.0 * (1.0 - kReferenceHybridSearchS / kReferenceFullSearchS);
  record(6, "planning speedup", pass,
         detail + fmt("  [need >= %.0f%% on all; reference %.2fs -> %.2fs (%.1f%%)]",
                      kMinReductionPct, kReferenceFullSearchS, kReferenceHybridSearchS, ref),
         t0);
}

void criterion_planning(const std::vector<ShapeRun>& runs, double t0) {
  int ok_shapes = 0;
  std::string detail;
  for (const ShapeRun& r : runs) {
    const bool ok = r.plan_hybrid <= r.plan_full;
    ok_shapes += ok;
    detail += fmt("%s%s: hybrid %.4f m vs full %.4f m%s", detail.empty() ? "" : "; ",
                  r.shape.c_str(), r.plan_hybrid, r.plan_full, ok ? "" : " (x)");
  }
  record(7, "planning accuracy ordering", ok_shapes >= 2,
         detail + fmt("  [%d/3, need 2]", ok_shapes), t0);
}

void criterion_routes(const ShapeRun& r, double t0) {
  std::map<std::string, std::map<std::string, std::pair<double, double>>> by_route;
  for (const json& row : r.route.at("rows")) {
    by_route[row.at("route").get<std::string>()][row.at("policy").get<std::string>()] = {
        row.at("sr").get<double>(), row.at("sgcr").get<double>()};
  }
  bool weak = true;
  int strict = 0;
  std::string detail;
  for (const auto& [route, pol] : by_route) {
    const auto h = pol.at("hybrid"), f = pol.at("full"), o = pol.at("real");
    weak = weak && h.first >= f.first && h.second >= f.second;
    strict += (h.first > f.first || h.second > f.second);
    detail += fmt("%s%s hybrid %.2f/%.3f full %.2f/%.3f oracle %.2f/%.3f",
                  detail.empty() ? "" : "; ", route.c_str(), h.first, h.second, f.first, f.second,
                  o.first, o.second);
  }
  const auto first = by_route.begin();
  const bool oracle_ok = first != by_route.end() && first->second.at("real").second == 1.0;
  const bool pass = by_route.size() == 3 && weak && strict >= 2 && oracle_ok &&
                    r.route_seconds < kRouteBudgetS;
  record(9, "task ordering", pass,
         detail + fmt("  [SR/SGCR; strict on %d/3, need 2; oracle SGCR route 1 = 1; %.0fs of %.0fs]",
                      strict, r.route_seconds, kRouteBudgetS),
         t0);
}

// ---- 8: CMA-ES ------------------------------------------------------------------------

bool monotone(const CmaResult& r) {
  for (std::size_t g = 1; g < r.best_history.size(); ++g) {
    if (r.best_history[g] > r.best_history[g - 1]) return false;
  }
  return r.best_history.empty() || r.best_history.back() == r.best_f;
}

void criterion_cma() {
  const double t0 = monotonic_seconds();
  int solved = 0, runs = 0, mono = 0;
  long worst_evals = 0;
  auto sphere = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CmaConfig cfg;
    cfg.dim = 3;
    cfg.sigma0 = 0.3;
    cfg.lo = Eigen::VectorXd::Constant(3, -1.0);
    cfg.hi = Eigen::VectorXd::Constant(3, 1.0);
    cfg.seed = seed;
    cfg.max_evals = kSphereEvals;
    cfg.f_tol = 0.0;
    cfg.x_tol = 0.0;
    const CmaResult r = cma_es(cfg, sphere);
    solved += r.best_x.norm() < kSphereTol && r.evals <= kSphereEvals;
    worst_evals = std::max(worst_evals, r.evals);
    mono += monotone(r);
    ++runs;
  }
  // Monotonicity on real planning searches too, across shapes and engines.
  for (int k = 0; k < 3; ++k) {
    const ShapeSpec shape = default_shape(static_cast<ShapeKind>(k));
    const HybridEngine full = HybridEngine::full_solver(shape.kind, {0.3, 0.25, 0.35, 0.6});
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      SearchObjective obj;
      obj.target_pos = {0.02 * (seed + 1), -0.08};
      obj.target_heading = 0.1 * seed;
      obj.engine = &full;
      obj.shape = shape;
      CmaConfig cfg;
      cfg.seed = seed;
      cfg.max_evals = 200;
      cfg.parallel = false;
      mono += monotone(plan_strike(obj, cfg).search);
      ++runs;
    }
  }
  record(8, "CMA-ES correctness", solved == 10 && mono == runs,
         fmt("sphere |x| < %.0e within %ld evals on %d/10 seeds (max used %ld); best-so-far "
             "monotone on %d/%d runs",
             kSphereTol, kSphereEvals, solved, worst_evals, mono, runs),
         t0);
}

// ---- 10: reproducibility ------------------------------------------------------------

void criterion_repro(const RunConfig& first, const fs::path& second_dir, double t0) {
  RunConfig again = first;
  again.out_dir = second_dir.string();
  bool pass = false;
  std::string detail;
  try {
    run_pipeline(again, true);
    std::string summary;
    lab_verify(again, first.out_dir, again.out_dir, &summary);
    const json s = json::parse(summary);
    pass = true;
    detail = fmt("two runs of seed %llu identical modulo wall-clock: %s",
                 static_cast<unsigned long long>(first.seed), s.dump().substr(0, 200).c_str());
  } catch (const Error& e) {
    detail = e.what();
  }
  record(10, "reproducibility", pass, detail, t0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"impactlab acceptance harness"};
  std::string work = (fs::temp_directory_path() / "impactlab_acceptance").string();
  std::vector<int> only;
  app.add_option("--work", work, "Scratch directory for pipeline runs");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> want(only.begin(), only.end());
  auto on = [&](int id) { return want.empty() || want.count(id) > 0; };

  std::printf("%s acceptance, reference seed %llu\n", kToolVersion,
              static_cast<unsigned long long>(kReferenceSeed));
  try {
    if (on(1)) criterion_gradients();
    if (on(2)) criterion_physics();
    if (on(3)) criterion_identifiability();
    if (on(8)) criterion_cma();

    const bool need_pipeline = on(4) || on(5) || on(6) || on(7) || on(9) || on(10);
    if (need_pipeline) {
      fs::remove_all(work);
      std::vector<ShapeRun> runs;
      RunConfig disc_cfg;
      double t0 = monotonic_seconds();
      const bool all_shapes = on(4) || on(5) || on(6) || on(7);
      for (int k = 0; k < 3; ++k) {
        if (k > 0 && !all_shapes) break;
        const RunConfig cfg = shape_config(static_cast<ShapeKind>(k), fs::path(work) / "a" /
                                           std::string(shape_name(static_cast<ShapeKind>(k))));
        const bool route = k == 0 && (on(9) || on(10));
        const double s0 = monotonic_seconds();
        run_pipeline(cfg, false);
        double route_s = 0.0;
        if (route) {
          const double r0 = monotonic_seconds();
          lab_route(cfg);
          route_s = monotonic_seconds() - r0;
        }
        runs.push_back(collect(cfg, route));
        runs.back().route_seconds = route_s;
        std::printf("  pipeline %s done in %.0fs\n", runs.back().shape.c_str(),
                    monotonic_seconds() - s0);
        std::fflush(stdout);
        if (k == 0) disc_cfg = cfg;
      }
      if (all_shapes) {
        if (on(4)) criterion_overfit(runs, t0);
        if (on(5)) criterion_baselines(runs, t0);
        if (on(6)) criterion_speedup(runs, t0);
        if (on(7)) criterion_planning(runs, t0);
      }
      if (on(9)) criterion_routes(runs.front(), monotonic_seconds() - runs.front().route_seconds);
      if (on(10)) criterion_repro(disc_cfg, fs::path(work) / "b" / "semidisc", monotonic_seconds());
    }
  } catch (const Error& e) {
    std::printf("harness error (%s): %s\n", error_code_name(e.code()).data(), e.what());
    return 2;
  }

  std::sort(g_lines.begin(), g_lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int failed = 0;
  std::printf("\nsummary\n");
  for (const Line& l : g_lines) {
    std::printf("  %2d %-28s %s\n", l.id, l.name.c_str(), l.pass ? "PASS" : "FAIL");
    failed += !l.pass;
  }
  std::printf("%zu criteria, %d failed\n", g_lines.size(), failed);
  return failed == 0 ? 0 : 1;
}
