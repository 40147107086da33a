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

#include "impactlab/lab.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"

namespace impactlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json params_to_json(const ContactParams& p) {
  return {{"mu1", p.mu1}, {"mu2", p.mu2}, {"e1", p.e1}, {"e2", p.e2}};
}

ContactParams params_from_json(const json& j) {
  return {j.at("mu1").get<double>(), j.at("mu2").get<double>(), j.at("e1").get<double>(),
          j.at("e2").get<double>()};
}

json full_json(const RunConfig& c) {
  json j;
  j["shape"] = {{"kind", std::string(shape_name(c.shape.kind))},
                {"size", c.shape.size},
                {"mass", c.shape.mass}};
  j["impactor"] = {{"mass", c.impactor.mass},
                   {"radius", c.impactor.radius},
                   {"commanded", c.impactor.commanded}};
  j["reality"] = {{"hidden_params", params_to_json(c.reality.hidden_params)},
                  {"restitution_velocity_coeff", c.reality.restitution_velocity_coeff},
                  {"slide_spin_coupling", c.reality.slide_spin_coupling},
                  {"contact_jitter_sigma", c.reality.contact_jitter_sigma},
                  {"seed", c.reality.seed}};
  j["data"] = {{"n_sim", c.data.n_sim}, {"n_real", c.data.n_real}, {"n_train", c.data.n_train}};
  j["schedule"] = {{"pretrain", c.schedule.pretrain},
                   {"identify", c.schedule.identify},
                   {"finetune", c.schedule.finetune},
                   {"real_only", c.schedule.real_only},
                   {"overfit", c.schedule.overfit}};
  j["plan"] = {{"max_evals", c.plan.max_evals},
               {"sigma0", c.plan.sigma0},
               {"targets", c.plan.targets},
               {"trials", c.plan.trials}};
  j["routes"] = {{"trials", c.routes.trials},
                 {"fixtures", c.routes.fixtures},
                 {"files", c.routes.files}};
  j["alphas"] = c.alphas;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["threads"] = c.threads;
  return j;
}

// Rejects keys the defaults do not have, so typos do not pass silently.
void check_known_keys(const json& user, const json& defaults, const std::string& where) {
  if (!user.is_object()) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (!defaults.contains(it.key())) {
      fail(ErrorCode::kConfig, "unknown config key " + where + it.key());
    }
    const json& d = defaults.at(it.key());
    if (d.is_object() && it.key() != "hidden_params") {
      check_known_keys(it.value(), d, where + it.key() + ".");
    }
  }
}

RunConfig parse_full(const json& j) {
  RunConfig c;
  try {
    const auto kind = parse_shape_kind(j.at("shape").at("kind").get<std::string>());
    if (!kind) fail(ErrorCode::kConfig, "unknown shape kind");
    c.shape = ShapeSpec::make(*kind, j["shape"].at("size").get<double>(),
                              j["shape"].at("mass").get<double>());
    const json& im = j.at("impactor");
    c.impactor = {im.at("mass").get<double>(), im.at("radius").get<double>(),
                  im.at("commanded").get<bool>()};
    const json& re = j.at("reality");
    c.reality.hidden_params = params_from_json(re.at("hidden_params"));
    c.reality.restitution_velocity_coeff = re.at("restitution_velocity_coeff").get<double>();
    c.reality.slide_spin_coupling = re.at("slide_spin_coupling").get<double>();
    c.reality.contact_jitter_sigma = re.at("contact_jitter_sigma").get<double>();
    c.reality.seed = re.at("seed").get<std::uint64_t>();
    const json& d = j.at("data");
    c.data = {d.at("n_sim").get<long>(), d.at("n_real").get<long>(), d.at("n_train").get<long>()};
    const json& s = j.at("schedule");
    c.schedule = {s.at("pretrain").get<long>(), s.at("identify").get<long>(),
                  s.at("finetune").get<long>(), s.at("real_only").get<long>(),
                  s.at("overfit").get<long>()};
    const json& p = j.at("plan");
    c.plan = {p.at("max_evals").get<long>(), p.at("sigma0").get<double>(),
              p.at("targets").get<int>(), p.at("trials").get<int>()};
    const json& r = j.at("routes");
    c.routes.trials = r.at("trials").get<int>();
    c.routes.fixtures = r.at("fixtures").get<std::vector<int>>();
    c.routes.files = r.at("files").get<std::vector<std::string>>();
    c.alphas = j.at("alphas").get<std::vector<double>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.out_dir = j.at("out_dir").get<std::string>();
    c.threads = j.at("threads").get<unsigned>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  c.validate();
  return c;
}

json report_header(const RunConfig& cfg, const char* command) {
  return {{"tool_version", kToolVersion},
          {"command", command},
          {"config_hash", config_hash(cfg)},
          {"seed", cfg.seed}};
}

void write_json(const RunConfig& cfg, const std::string& name, const json& doc) {
  write_text_file(out_path(cfg, name), doc.dump(2) + "\n");
}

std::string csv_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct RealSplit {
  Dataset train, test;
};

Dataset load_checked(const RunConfig& cfg, const char* file, DataOrigin origin) {
  Dataset d = load_dataset(out_path(cfg, file));
  if (d.shape != cfg.shape.kind) {
    fail(ErrorCode::kConfig, std::string(file) + " holds a different shape");
  }
  if (d.origin != origin) fail(ErrorCode::kConfig, std::string(file) + " has the wrong origin");
  return d;
}

RealSplit load_real_split(const RunConfig& cfg) {
  auto [tr, te] = split_dataset(load_checked(cfg, kRealDatasetFile, DataOrigin::kRealProxy),
                                static_cast<std::size_t>(cfg.data.n_train));
  return {std::move(tr), std::move(te)};
}

struct Trained {
  Mlp base;
  Mlp final_model;
  ContactParams params;
  std::string final_stage;  // "final" or "ident" with --skip-finetune
};

Trained load_trained(const RunConfig& cfg) {
  Trained t;
  t.base = load_checkpoint(out_path(cfg, kBaseCkptFile));
  const Mlp ident = load_checkpoint(out_path(cfg, kIdentCkptFile));
  if (!ident.meta.contact_params) {
    fail(ErrorCode::kConfig, "identified checkpoint carries no contact parameters");
  }
  t.params = *ident.meta.contact_params;
  if (fs::exists(out_path(cfg, kFinalCkptFile))) {
    t.final_model = load_checkpoint(out_path(cfg, kFinalCkptFile));
    t.final_stage = "final";
  } else {
    t.final_model = ident;
    t.final_stage = "ident";
  }
  return t;
}

// Engines shared by plan, bench and route: the adapted hybrid, the
// full solver at grid-searched parameters, and the proxy itself.
struct Engines {
  ContactParams grid;
  std::unique_ptr<HybridEngine> hybrid, full, real;
};

Engines build_engines(const RunConfig& cfg) {
  const Trained t = load_trained(cfg);
  const RealSplit split = load_real_split(cfg);
  Engines e;
  e.grid = baseline_grid_search(cfg.shape, cfg.impactor, split.train);
  e.hybrid = std::make_unique<HybridEngine>(HybridEngine::surrogate(
      cfg.shape.kind, std::make_shared<const Mlp>(t.final_model), t.params));
  e.full = std::make_unique<HybridEngine>(HybridEngine::full_solver(cfg.shape.kind, e.grid));
  e.real = std::make_unique<HybridEngine>(HybridEngine::real_proxy(cfg.shape.kind, cfg.reality));
  return e;
}

std::vector<PlanTarget> plan_targets(const RunConfig& cfg, const HybridEngine& real) {
  return reachable_targets(real, cfg.shape, cfg.impactor, BodyState{}, cfg.plan.targets,
                           substream_seed(SeedStreams(cfg.seed).plan, 0));
}

CmaConfig planner_config(const RunConfig& cfg, std::uint64_t seed) {
  CmaConfig c;
  c.max_evals = cfg.plan.max_evals;
  c.sigma0 = cfg.plan.sigma0;
  c.seed = seed;
  return c;
}

json stats_json(const BenchStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

class ThreadScope {
 public:
  explicit ThreadScope(unsigned n) : saved_(max_threads()) {
    if (n > 0) set_max_threads(n);
  }
  ~ThreadScope() { set_max_threads(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  unsigned saved_;
};

void strip_json(json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      if (it.key().find("wall_clock") != std::string::npos) {
        it = j.erase(it);
      } else {
        strip_json(it.value());
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (json& x : j) strip_json(x);
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::vector<std::string> list_files(const std::string& dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) fail(ErrorCode::kIo, "not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

void RunConfig::validate() const {
  if (!(shape.size > 0.0 && shape.mass > 0.0)) fail(ErrorCode::kConfig, "shape size and mass");
  if (!(impactor.mass > 0.0 && impactor.radius > 0.0)) {
    fail(ErrorCode::kConfig, "impactor mass and radius must be positive");
  }
  reality.validate();
  if (!param_box().contains(reality.hidden_params)) {
    fail(ErrorCode::kConfig, "hidden parameters lie outside the parameter box");
  }
  if (data.n_sim < 1 || data.n_real < 2 || data.n_train < 1 || data.n_train >= data.n_real) {
    fail(ErrorCode::kConfig, "dataset sizes need n_sim >= 1 and 1 <= n_train < n_real");
  }
  if (schedule.pretrain < 1 || schedule.identify < 1 || schedule.finetune < 1 ||
      schedule.real_only < 1 || schedule.overfit < 1) {
    fail(ErrorCode::kConfig, "schedule values must be positive");
  }
  if (plan.max_evals < 1 || !(plan.sigma0 > 0.0) || plan.targets < 1 || plan.trials < 1) {
    fail(ErrorCode::kConfig, "planner settings must be positive");
  }
  if (routes.trials < 1) fail(ErrorCode::kConfig, "route trials must be positive");
  for (int f : routes.fixtures) {
    if (f < 1 || f > 3) fail(ErrorCode::kConfig, "route fixtures are numbered 1 to 3");
  }
  if (alphas.empty()) fail(ErrorCode::kConfig, "need at least one alpha");
  for (double a : alphas) {
    if (!(a > 0.0)) fail(ErrorCode::kConfig, "alpha must be positive");
  }
  if (out_dir.empty()) fail(ErrorCode::kConfig, "out_dir is empty");
}

std::string run_config_to_json(const RunConfig& cfg) { return full_json(cfg).dump(2) + "\n"; }

RunConfig run_config_from_json(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config json: ") + e.what());
  }
  if (!user.is_object()) fail(ErrorCode::kConfig, "config must be a JSON object");
  json merged = full_json(RunConfig{});
  check_known_keys(user, merged, "");
  // A shape kind alone picks that shape's default size and mass.
  if (user.contains("shape") && user["shape"].contains("kind")) {
    const auto kind = parse_shape_kind(user["shape"]["kind"].is_string()
                                           ? user["shape"]["kind"].get<std::string>()
                                           : std::string());
    if (!kind) fail(ErrorCode::kConfig, "unknown shape kind");
    const ShapeSpec d = default_shape(*kind);
    merged["shape"]["size"] = d.size;
    merged["shape"]["mass"] = d.mass;
  }
  merged.merge_patch(user);
  return parse_full(merged);
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(read_text_file(path));
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& json_value) {
  json value;
  try {
    value = json::parse(json_value);
  } catch (const json::exception&) {
    value = json_value;  // bare strings
  }
  json j = full_json(cfg);
  std::string pointer = "/" + key;
  std::replace(pointer.begin(), pointer.end(), '.', '/');
  try {
    const json::json_pointer ptr(pointer);
    if (!j.contains(ptr)) fail(ErrorCode::kConfig, "unknown config key " + key);
    j[ptr] = value;
    if (key == "shape.kind" && value.is_string()) {
      // A new kind brings its own default size and mass.
      if (const auto kind = parse_shape_kind(value.get<std::string>())) {
        j["shape"]["size"] = default_shape(*kind).size;
        j["shape"]["mass"] = default_shape(*kind).mass;
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, "override " + key + ": " + e.what());
  }
  cfg = parse_full(j);
}

std::string config_hash(const RunConfig& cfg) {
  json j = full_json(cfg);
  j.erase("out_dir");
  j.erase("threads");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(j.dump()));
  return buf;
}

SeedStreams::SeedStreams(std::uint64_t master)
    : data(stream_seed(master, "data")),
      init(stream_seed(master, "init")),
      train(stream_seed(master, "train")),
      plan(stream_seed(master, "plan")),
      eval(stream_seed(master, "eval")) {}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

std::string lab_gen_data(const RunConfig& cfg, DataOrigin origin) {
  cfg.validate();
  ThreadScope threads(cfg.threads);
  const SeedStreams s(cfg.seed);
  const double t0 = monotonic_seconds();
  Dataset d;
  std::string file;
  if (origin == DataOrigin::kSim) {
    d = generate_sim_dataset(cfg.shape, cfg.impactor, cfg.data.n_sim, substream_seed(s.data, 0));
    file = kSimDatasetFile;
  } else {
    d = generate_real_dataset(cfg.reality, cfg.shape, cfg.impactor, cfg.data.n_real,
                              substream_seed(s.data, 1));
    file = kRealDatasetFile;
  }
  save_dataset(d, out_path(cfg, file));
  json out = report_header(cfg, "gen-data");
  out["file"] = out_path(cfg, file);
  out["origin"] = std::string(origin_name(origin));
  out["shape"] = std::string(shape_name(cfg.shape.kind));
  out["n"] = d.size();
  out["dataset_seed"] = d.seed;
  out["wall_clock_s"] = monotonic_seconds() - t0;
  return out.dump(2);
}

std::string lab_train(const RunConfig& cfg, bool skip_finetune) {
  cfg.validate();
  ThreadScope threads(cfg.threads);
  const SeedStreams s(cfg.seed);
  const Dataset sim = load_checked(cfg, kSimDatasetFile, DataOrigin::kSim);
  const RealSplit split = load_real_split(cfg);

  PretrainConfig pc;
  pc.steps = cfg.schedule.pretrain;
  pc.seed = substream_seed(s.train, 0);
  auto [base, pre] = pretrain(init_surrogate(sim, s.init), sim, pc);
  base.meta.contact_params.reset();

  const double mu2 = fit_ground_friction(split.train);
  IdentifyConfig ic;
  ic.steps = cfg.schedule.identify;
  ic.mu2_prior = mu2;
  const auto [p, ident] = identify_params(base, split.train, BoxReparam::midpoint(), ic);

  std::vector<std::string> written;
  save_checkpoint(base, out_path(cfg, kBaseCkptFile));
  written.push_back(kBaseCkptFile);
  Mlp ident_model = base;
  ident_model.meta.contact_params = p;
  save_checkpoint(ident_model, out_path(cfg, kIdentCkptFile));
  written.push_back(kIdentCkptFile);

  std::vector<TrainReport> reports{pre, ident};
  if (!skip_finetune) {
    FinetuneConfig fc;
    fc.steps = cfg.schedule.finetune;
    auto [fin, ft] = finetune(base, split.train, p, fc);
    fin.meta.contact_params = p;
    save_checkpoint(fin, out_path(cfg, kFinalCkptFile));
    written.push_back(kFinalCkptFile);
    reports.push_back(ft);
  } else {
    fs::remove(out_path(cfg, kFinalCkptFile));
  }

  json stages = json::array();
  for (const TrainReport& r : reports) {
    json row = {{"stage", std::string(stage_name(r.stage))},
                {"steps", r.steps},
                {"initial_loss", r.initial_loss},
                {"final_loss", r.final_loss},
                {"loss_curve", r.loss_curve},
                {"wall_clock_s", r.wall_clock_s},
                {"seed", cfg.seed}};
    if (r.params) row["params"] = params_to_json(*r.params);
    stages.push_back(row);
  }
  json doc = report_header(cfg, "train");
  doc["stages"] = stages;
  doc["mu2_regressed"] = mu2;
  doc["identified_params"] = params_to_json(p);
  doc["params_in_box"] = param_box().contains(p);
  doc["checkpoints"] = written;
  write_json(cfg, "report_train.json", doc);

  json out = report_header(cfg, "train");
  out["checkpoints"] = written;
  out["identified_params"] = params_to_json(p);
  out["mu2_regressed"] = mu2;
  out["pretrain_loss"] = {pre.initial_loss,
                          pre.final_loss};
  out["identify_loss"] = {ident.initial_loss,
                          ident.final_loss};
  return out.dump(2);
}

std::string lab_eval(const RunConfig& cfg) {
  cfg.validate();
  ThreadScope threads(cfg.threads);
  const SeedStreams s(cfg.seed);
  const Trained t = load_trained(cfg);
  const RealSplit split = load_real_split(cfg);
  const double rg = cfg.shape.gyration_radius();

  const ContactParams grid = baseline_grid_search(cfg.shape, cfg.impactor, split.train);
  RealOnlyConfig rc;
  rc.steps = cfg.schedule.real_only;
  rc.seed = substream_seed(s.train, 1);
  const Mlp real_only = baseline_real_only(split.train, rc).first;
  FinetuneConfig long_ft;
  long_ft.steps = cfg.schedule.overfit;
  const Mlp overfit = finetune(t.base, split.train, t.params, long_ft).first;

  std::vector<PostImpact> truth;
  for (const CollisionSample& c : split.test.samples) truth.push_back(c.post);
  const std::vector<std::pair<std::string, std::vector<PostImpact>>> models{
      {"oracle", truth},
      {"full_grid", predict_full(cfg.shape, cfg.impactor, grid, split.test)},
      {"real_only", predict_surrogate(real_only, box_midpoint(), split.test)},
      {"base", predict_surrogate(t.base, t.params, split.test)},
      {t.final_stage == "final" ? "final" : "final_unfinetuned",
       predict_surrogate(t.final_model, t.params, split.test)},
      {"finetune_long", predict_surrogate(overfit, t.params, split.test)},
  };

  json rows = json::array();
  std::string csv = "model,alpha,accuracy,seed\n";
  for (const auto& [name, pred] : models) {
    for (double a : cfg.alphas) {
      const double acc = accuracy(pred, split.test, a, rg);
      rows.push_back({{"model", name}, {"alpha", a}, {"accuracy", acc}, {"seed", cfg.seed}});
      csv += name + "," + csv_double(a) + "," + csv_double(acc) + "," + std::to_string(cfg.seed) +
             "\n";
    }
  }
  json doc = report_header(cfg, "eval");
  doc["shape"] = std::string(shape_name(cfg.shape.kind));
  doc["test_size"] = split.test.size();
  doc["grid_params"] = params_to_json(grid);
  doc["identified_params"] = params_to_json(t.params);
  doc["finetune_steps_long"] = cfg.schedule.overfit;
  doc["rows"] = rows;
  write_json(cfg, "report_eval.json", doc);
  write_text_file(out_path(cfg, "report_eval.csv"), csv);
  return doc.dump(2);
}

std::string lab_plan(const RunConfig& cfg) {
  cfg.validate();
  ThreadScope threads(cfg.threads);
  const SeedStreams s(cfg.seed);
  const Engines e = build_engines(cfg);
  const std::vector<PlanTarget> targets = plan_targets(cfg, *e.real);

  json rows = json::array();
  std::string csv = "engine,target_id,trial,seed,evals,pos_err_m,ori_err_rad,wall_clock_s\n";
  std::vector<double> pos[2], ori[2];
  const HybridEngine* engines[2] = {e.full.get(), e.hybrid.get()};
  for (int t = 0; t < cfg.plan.targets; ++t) {
    for (int k = 0; k < cfg.plan.trials; ++k) {
      const std::uint64_t seed =
          substream_seed(s.plan, 1 + static_cast<std::uint64_t>(t * cfg.plan.trials + k));
      for (int m = 0; m < 2; ++m) {
        SearchObjective obj;
        obj.target_pos = targets[t].pos;
        obj.target_heading = targets[t].heading;
        obj.engine = engines[m];
        obj.shape = cfg.shape;
        obj.impactor = cfg.impactor;
        const PlanResult r = plan_strike(obj, planner_config(cfg, seed), e.real.get());
        const std::string name(collision_model_name(engines[m]->model()));
        rows.push_back({{"engine", name},
                        {"target_id", t},
                        {"trial", k},
                        {"seed", seed},
                        {"evals", r.evals},
                        {"pos_err_m", r.pos_error},
                        {"ori_err_rad", r.ori_error},
                        {"spec", {r.best_spec.speed, r.best_spec.point_param, r.best_spec.deflection}},
                        {"wall_clock_s", r.wall_clock}});
        csv += name + "," + std::to_string(t) + "," + std::to_string(k) + "," +
               std::to_string(seed) + "," + std::to_string(r.evals) + "," +
               csv_double(r.pos_error) + "," + csv_double(r.ori_error) + "," +
               csv_double(r.wall_clock) + "\n";
        pos[m].push_back(r.pos_error);
        ori[m].push_back(r.ori_error);
      }
    }
  }
  json doc = report_header(cfg, "plan");
  doc["shape"] = std::string(shape_name(cfg.shape.kind));
  doc["grid_params"] = params_to_json(e.grid);
  doc["protocol"] = {{"targets", cfg.plan.targets}, {"trials", cfg.plan.trials},
                     {"max_evals", cfg.plan.max_evals}};
  json summary = json::object();
  for (int m = 0; m < 2; ++m) {
    summary[std::string(collision_model_name(engines[m]->model()))] = {
        {"pos_err_m", stats_json(mean_std(pos[m]))}, {"ori_err_rad", stats_json(mean_std(ori[m]))}};
  }
  doc["summary"] = summary;
  doc["rows"] = rows;
  write_json(cfg, "report_plan.json", doc);
  write_text_file(out_path(cfg, "report_plan.csv"), csv);
  return doc.dump(2);
}

std::string lab_bench(const RunConfig& cfg) {
  cfg.validate();
  const SeedStreams s(cfg.seed);
  const Engines e = build_engines(cfg);
  const std::vector<PlanTarget> targets = plan_targets(cfg, *e.real);
  const CmaConfig cma = planner_config(cfg, substream_seed(s.eval, 0));
  const BenchReport rep = bench_search_time(*e.full, *e.hybrid, cfg.shape, cfg.impactor,
                                            BodyState{}, targets, cma, e.real.get());
  json doc = report_header(cfg, "bench");
  doc["shape"] = std::string(shape_name(cfg.shape.kind));
  doc["threads"] = 1;
  doc["max_evals"] = cfg.plan.max_evals;
  doc["targets"] = cfg.plan.targets;
  doc["full_wall_clock_s"] = stats_json(rep.full_wall_clock);
  doc["hybrid_wall_clock_s"] = stats_json(rep.hybrid_wall_clock);
  doc["full_collision_wall_clock_s"] = stats_json(rep.full_collision_wall_clock);
  doc["hybrid_collision_wall_clock_s"] = stats_json(rep.hybrid_collision_wall_clock);
  doc["reduction_pct_wall_clock"] = rep.reduction_pct;
  doc["reference"] = {{"full_s", kReferenceFullSearchS},
                      {"hybrid_s", kReferenceHybridSearchS},
                      {"reduction_pct",
                       100.0 * (1.0 - kReferenceHybridSearchS / kReferenceFullSearchS)},
                      {"shape", "semidisc"}};
  json rows = json::array();
  for (const BenchRow& r : rep.rows) {
    rows.push_back({{"engine", r.engine},
                    {"target_id", r.target_id},
                    {"seed", r.seed},
                    {"evals", r.evals},
                    {"wall_clock_s", r.wall_clock_s},
                    {"collision_wall_clock_s", r.collision_wall_clock_s},
                    {"pos_err_m", r.pos_err_m},
                    {"ori_err_rad", r.ori_err_rad}});
  }
  doc["rows"] = rows;
  write_json(cfg, "report_bench.json", doc);
  write_text_file(out_path(cfg, "report_bench.csv"), bench_rows_csv(rep.rows));
  return doc.dump(2);
}

std::string lab_route(const RunConfig& cfg) {
  cfg.validate();
  ThreadScope threads(cfg.threads);
  const SeedStreams s(cfg.seed);
  const Engines e = build_engines(cfg);
  std::vector<Route> routes;
  for (int f : cfg.routes.fixtures) routes.push_back(fixture_route(f));
  for (const std::string& path : cfg.routes.files) routes.push_back(route_from_json(read_text_file(path)));

  json rows = json::array();
  std::string csv = "route,policy,seed,trials,segments,successes,completed_segments,sr,sgcr,wall_clock_s\n";
  std::string log;
  const HybridEngine* policies[3] = {e.hybrid.get(), e.full.get(), e.real.get()};
  for (std::size_t i = 0; i < routes.size(); ++i) {
    RouteRunConfig rc;
    rc.trials = cfg.routes.trials;
    rc.seed = substream_seed(s.eval, 1 + i);
    rc.planner = planner_config(cfg, 0);
    for (const HybridEngine* pol : policies) {
      const RouteResult r = run_route(*pol, *e.real, cfg.shape, cfg.impactor, routes[i], rc);
      rows.push_back({{"route", r.route_id},
                      {"policy", r.policy_engine},
                      {"seed", rc.seed},
                      {"trials", r.trials},
                      {"segments", r.segments},
                      {"successes", r.successes},
                      {"completed_segments", r.completed_segments},
                      {"sr", r.sr},
                      {"sgcr", r.sgcr},
                      {"wall_clock_s", r.wall_clock}});
      csv += r.route_id + "," + r.policy_engine + "," + std::to_string(rc.seed) + "," +
             std::to_string(r.trials) + "," + std::to_string(r.segments) + "," +
             std::to_string(r.successes) + "," + std::to_string(r.completed_segments) + "," +
             csv_double(r.sr) + "," + csv_double(r.sgcr) + "," + csv_double(r.wall_clock) + "\n";
      log += route_log_jsonl(r);
    }
  }
  json doc = report_header(cfg, "route");
  doc["shape"] = std::string(shape_name(cfg.shape.kind));
  doc["grid_params"] = params_to_json(e.grid);
  doc["rows"] = rows;
  write_json(cfg, "report_route.json", doc);
  write_text_file(out_path(cfg, "report_route.csv"), csv);
  write_text_file(out_path(cfg, "route_log.jsonl"), log);
  return doc.dump(2);
}

std::string strip_wall_clock(const std::string& name, const std::string& text) {
  if (ends_with(name, ".json")) {
    try {
      json j = json::parse(text);
      strip_json(j);
      return j.dump();
    } catch (const json::exception&) {
      return text;
    }
  }
  if (ends_with(name, ".jsonl")) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
      try {
        json j = json::parse(line);
        strip_json(j);
        out += j.dump();
      } catch (const json::exception&) {
        out += line;
      }
      out += '\n';
    }
    return out;
  }
  if (ends_with(name, ".csv")) {
    std::istringstream in(text);
    std::string line, out;
    std::vector<bool> keep;
    bool header = true;
    while (std::getline(in, line)) {
      const auto cells = split_line(line);
      if (header) {
        for (const auto& c : cells) keep.push_back(c.find("wall_clock") == std::string::npos);
        header = false;
      }
      bool first = true;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i < keep.size() && !keep[i]) continue;
        if (!first) out += ',';
        out += cells[i];
        first = false;
      }
      out += '\n';
    }
    return out;
  }
  return text;
}

void lab_verify(const RunConfig& cfg, const std::string& dir_a, const std::string& dir_b,
                std::string* summary) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  json doc = report_header(cfg, "verify");
  json checked = json::array(), bad_hash = json::array(), compared = json::array(),
       differing = json::array();
  const std::vector<std::string> names = list_files(dir_a);
  for (const std::string& n : names) {
    if (n.rfind("report_", 0) != 0 || !ends_with(n, ".json")) continue;
    checked.push_back(n);
    std::string got;
    try {
      got = json::parse(read_text_file((fs::path(dir_a) / n).string())).value("config_hash", "");
    } catch (const json::exception&) {
    }
    if (got != hash) bad_hash.push_back(n);
  }
  if (!dir_b.empty()) {
    const std::vector<std::string> other = list_files(dir_b);
    std::set<std::string> all(names.begin(), names.end());
    all.insert(other.begin(), other.end());
    for (const std::string& n : all) {
      const fs::path a = fs::path(dir_a) / n, b = fs::path(dir_b) / n;
      compared.push_back(n);
      if (!fs::exists(a) || !fs::exists(b) ||
          strip_wall_clock(n, read_text_file(a.string())) !=
              strip_wall_clock(n, read_text_file(b.string()))) {
        differing.push_back(n);
      }
    }
  }
  const bool ok = bad_hash.empty() && differing.empty() && !checked.empty();
  doc["reports_checked"] = checked;
  doc["hash_mismatches"] = bad_hash;
  doc["compared"] = compared;
  doc["differing"] = differing;
  doc["ok"] = ok;
  if (summary) *summary = doc.dump(2);
  if (!ok) {
    fail(ErrorCode::kConfig, checked.empty() ? "no reports to verify in " + dir_a
                                             : "verification failed");
  }
}

}  // namespace impactlab
