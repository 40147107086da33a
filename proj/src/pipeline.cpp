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

#include "impactlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace impactlab {

using nlohmann::json;

std::string_view origin_name(DataOrigin origin) {
  return origin == DataOrigin::kSim ? "sim" : "real";
}

std::string_view stage_name(TrainStage stage) {
  switch (stage) {
    case TrainStage::kPretrain: return "pretrain";
    case TrainStage::kSysId: return "sysid";
    case TrainStage::kFinetune: return "finetune";
    case TrainStage::kRealOnly: return "real_only";
  }
  return "unknown";
}

void Dataset::validate() const {
  if (samples.empty()) fail(ErrorCode::kConfig, "dataset is empty");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const CollisionSample& s = samples[i];
    const bool has_params = s.params.has_value();
    if ((origin == DataOrigin::kSim) != has_params) {
      fail(ErrorCode::kConfig, "sample " + std::to_string(i) +
                                   (has_params ? " carries parameters in real data"
                                               : " lacks parameters in sim data"));
    }
    if (!s.post.finite()) fail(ErrorCode::kNumeric, "sample " + std::to_string(i) + " is not finite");
  }
}

namespace {

json spec_json(const ImpactSpec& s) {
  return {{"speed", s.speed}, {"point_param", s.point_param}, {"deflection", s.deflection}};
}

json params_json(const ContactParams& p) {
  return {{"mu1", p.mu1}, {"mu2", p.mu2}, {"e1", p.e1}, {"e2", p.e2}};
}

json post_json(const PostImpact& p) {
  return {{"vn", p.vn}, {"vt", p.vt}, {"omega", p.omega}};
}

}  // namespace

std::string dataset_to_jsonl(const Dataset& ds) {
  std::string out;
  json header = {{"schema_version", kDatasetSchemaVersion},
                 {"shape", std::string(shape_name(ds.shape))},
                 {"origin", std::string(origin_name(ds.origin))},
                 {"seed", ds.seed},
                 {"n", ds.samples.size()}};
  out += header.dump();
  out += '\n';
  for (const CollisionSample& s : ds.samples) {
    json line = {{"spec", spec_json(s.spec)}, {"post", post_json(s.post)}};
    if (s.params) line["params"] = params_json(*s.params);
    if (s.slide) line["slide"] = {{"dt", s.slide->dt}, {"speed", s.slide->speed}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

Dataset dataset_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Dataset ds;
  try {
    if (!std::getline(in, line)) fail(ErrorCode::kConfig, "dataset file is empty");
    const json header = json::parse(line);
    if (header.at("schema_version").get<int>() != kDatasetSchemaVersion) {
      fail(ErrorCode::kConfig, "unsupported dataset schema_version");
    }
    const auto shape = parse_shape_kind(header.at("shape").get<std::string>());
    if (!shape) fail(ErrorCode::kConfig, "unknown shape in dataset header");
    ds.shape = *shape;
    const std::string origin = header.at("origin").get<std::string>();
    if (origin == "sim") {
      ds.origin = DataOrigin::kSim;
    } else if (origin == "real") {
      ds.origin = DataOrigin::kRealProxy;
    } else {
      fail(ErrorCode::kConfig, "unknown dataset origin '" + origin + "'");
    }
    ds.seed = header.at("seed").get<std::uint64_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      CollisionSample s;
      const json& sp = j.at("spec");
      s.spec = {sp.at("speed").get<double>(), sp.at("point_param").get<double>(),
                sp.at("deflection").get<double>()};
      const json& po = j.at("post");
      s.post = {po.at("vn").get<double>(), po.at("vt").get<double>(), po.at("omega").get<double>()};
      if (j.contains("params")) {
        const json& p = j["params"];
        s.params = ContactParams{p.at("mu1").get<double>(), p.at("mu2").get<double>(),
                                 p.at("e1").get<double>(), p.at("e2").get<double>()};
      }
      if (j.contains("slide")) {
        SpeedTrace t;
        t.dt = j["slide"].at("dt").get<double>();
        t.speed = j["slide"].at("speed").get<std::vector<double>>();
        s.slide = std::move(t);
      }
      ds.samples.push_back(std::move(s));
    }
    if (ds.samples.size() != header.at("n").get<std::size_t>()) {
      fail(ErrorCode::kConfig, "dataset line count disagrees with its header");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed dataset: ") + e.what());
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  write_text_file(path, dataset_to_jsonl(ds));
}

Dataset load_dataset(const std::string& path) { return dataset_from_jsonl(read_text_file(path)); }

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

ImpactSpec draw_spec(std::mt19937_64& rng, const SpecBox& box) {
  return {uniform(rng, box.lo[0], box.hi[0]), uniform(rng, box.lo[1], box.hi[1]),
          uniform(rng, box.lo[2], box.hi[2])};
}

ContactParams draw_params(std::mt19937_64& rng, const ParamBox& box) {
  std::array<double, 4> a;
  for (int i = 0; i < 4; ++i) a[i] = uniform(rng, box.lo[i], box.hi[i]);
  return ContactParams::from_array(a);
}

void check_count(long n) {
  if (n < 1) fail(ErrorCode::kConfig, "dataset size must be at least 1");
}

[[noreturn]] void rethrow_with_index(const Error& e, std::size_t i) {
  fail(e.code(), "sample " + std::to_string(i) + ": " + e.what());
}

}  // namespace

Dataset generate_sim_dataset(const ShapeSpec& shape, const ImpactorSpec& impactor, long n,
                             std::uint64_t seed, const SolverSettings& settings) {
  check_count(n);
  Dataset ds;
  ds.origin = DataOrigin::kSim;
  ds.shape = shape.kind;
  ds.seed = seed;
  ds.samples.resize(static_cast<std::size_t>(n));
  const SpecBox sb = spec_box(shape.kind);
  const ParamBox pb = param_box();
  parallel_for(ds.samples.size(), [&](std::size_t i) {
    std::mt19937_64 rng(substream_seed(seed, i));
    CollisionSample& s = ds.samples[i];
    s.spec = draw_spec(rng, sb);
    s.params = draw_params(rng, pb);
    try {
      s.post = solve_impact_full(shape, impactor, s.spec, *s.params, settings);
    } catch (const Error& e) {
      rethrow_with_index(e, i);
    }
  });
  return ds;
}

Dataset generate_real_dataset(const RealityConfig& reality, const ShapeSpec& shape,
                              const ImpactorSpec& impactor, long n, std::uint64_t seed,
                              const SolverSettings& settings, int trace_stride) {
  check_count(n);
  reality.validate();
  if (trace_stride < 1) fail(ErrorCode::kConfig, "trace_stride must be positive");
  Dataset ds;
  ds.origin = DataOrigin::kRealProxy;
  ds.shape = shape.kind;
  ds.seed = seed;
  ds.samples.resize(static_cast<std::size_t>(n));
  const SpecBox sb = spec_box(shape.kind);
  parallel_for(ds.samples.size(), [&](std::size_t i) {
    std::mt19937_64 rng(substream_seed(seed, i));
    CollisionSample& s = ds.samples[i];
    s.spec = draw_spec(rng, sb);
    try {
      s.post = real_observe_impact(reality, shape, impactor, s.spec, settings);
    } catch (const Error& e) {
      rethrow_with_index(e, i);
    }
    const BodyState start = apply_post_impact(shape, BodyState{}, s.spec, s.post);
    const Trajectory traj = real_observe_slide(reality, shape, start, 20.0);
    SpeedTrace trace;
    trace.dt = traj.dt * trace_stride;
    for (std::size_t k = 0; k < traj.samples.size(); k += static_cast<std::size_t>(trace_stride)) {
      trace.speed.push_back(traj.samples[k].lin_vel.norm());
    }
    s.slide = std::move(trace);
  });
  return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t n_train) {
  if (n_train == 0 || n_train >= ds.samples.size()) {
    fail(ErrorCode::kConfig, "train split must leave both parts non-empty");
  }
  Dataset train = ds, test = ds;
  train.samples.assign(ds.samples.begin(), ds.samples.begin() + static_cast<long>(n_train));
  test.samples.assign(ds.samples.begin() + static_cast<long>(n_train), ds.samples.end());
  return {std::move(train), std::move(test)};
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

BoxReparam BoxReparam::midpoint(const ParamBox& box) {
  BoxReparam r;
  r.lo = box.lo;
  r.hi = box.hi;
  return r;
}

BoxReparam BoxReparam::from_params(const ContactParams& p, const ParamBox& box) {
  BoxReparam r = midpoint(box);
  const auto v = p.to_array();
  for (int i = 0; i < 4; ++i) {
    const double u = std::clamp((v[i] - box.lo[i]) / (box.hi[i] - box.lo[i]), 1e-9, 1.0 - 1e-9);
    r.raw[i] = std::log(u / (1.0 - u));
  }
  return r;
}

ContactParams BoxReparam::materialize() const {
  std::array<double, 4> v;
  for (int i = 0; i < 4; ++i) v[i] = lo[i] + (hi[i] - lo[i]) * sigmoid(raw[i]);
  return ContactParams::from_array(v);
}

std::array<double, 4> BoxReparam::jacobian() const {
  std::array<double, 4> j;
  for (int i = 0; i < 4; ++i) {
    const double s = sigmoid(raw[i]);
    j[i] = (hi[i] - lo[i]) * s * (1.0 - s);
  }
  return j;
}

ContactParams box_midpoint() { return BoxReparam::midpoint().materialize(); }

namespace {

// Columns are samples. Parameters come from the samples or from `fixed`.
Eigen::MatrixXd input_matrix(const Dataset& d, const std::optional<ContactParams>& fixed) {
  Eigen::MatrixXd x(kInputDim, static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const CollisionSample& s = d.samples[i];
    const ContactParams p = fixed ? *fixed : *s.params;
    x.col(static_cast<Eigen::Index>(i)) = SurrogateInput{s.spec, p}.to_vector();
  }
  return x;
}

Eigen::MatrixXd output_matrix(const Dataset& d) {
  Eigen::MatrixXd y(kOutputDim, static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    y.col(static_cast<Eigen::Index>(i)) = to_vector(d.samples[i].post);
  }
  return y;
}

// Grid over the free raw coordinates at logistic fractions (i + 0.5) / levels.
template <class LossFn>
BoxReparam scan_start(const BoxReparam& init, const std::array<bool, 4>& free, int levels,
                      LossFn&& loss_at) {
  std::vector<int> axes;
  for (int i = 0; i < 4; ++i) {
    if (free[i]) axes.push_back(i);
  }
  BoxReparam best = init;
  double best_loss = loss_at(init);
  std::size_t count = 1;
  for (std::size_t k = 0; k < axes.size(); ++k) count *= static_cast<std::size_t>(levels);
  BoxReparam probe = init;
  for (std::size_t g = 0; g < count && !axes.empty(); ++g) {
    std::size_t rem = g;
    for (int axis : axes) {
      const double u = (static_cast<double>(rem % static_cast<std::size_t>(levels)) + 0.5) / levels;
      rem /= static_cast<std::size_t>(levels);
      probe.raw[axis] = std::log(u / (1.0 - u));
    }
    const double l = loss_at(probe);
    if (l < best_loss) {
      best_loss = l;
      best = probe;
    }
  }
  return best;
}

// MSE over the output components in normalized units.
OutputVec mse_weights(const Mlp& model) { return normalized_loss_weights(model) / kOutputDim; }

// Per-speed models are trained on the speed-normalized state.
std::optional<Eigen::VectorXd> sample_weights(const Mlp& model, const Eigen::MatrixXd& x) {
  if (!model.per_speed_output) return std::nullopt;
  return x.row(kSpecSlice).transpose().array().square().inverse().matrix();
}

LossGrad batch_loss(const Mlp& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    const OutputVec& w, bool want_params, bool want_inputs) {
  const auto sw = sample_weights(model, x);
  return loss_and_grad(model, x, y, w, want_params, want_inputs, sw ? &*sw : nullptr);
}

// Post states divided by impact speed, the fitting target of per-speed models.
Eigen::MatrixXd per_speed(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return y.array().rowwise() / x.row(kSpecSlice).array();
}

void require_origin(const Dataset& d, DataOrigin origin, const char* what) {
  if (d.samples.empty()) fail(ErrorCode::kInsufficientData, std::string(what) + ": empty dataset");
  if (d.origin != origin) {
    fail(ErrorCode::kConfig, std::string(what) + " expects " + std::string(origin_name(origin)) +
                                 " data");
  }
}

}  // namespace

Mlp init_surrogate(const Dataset& d_sim, std::uint64_t seed) {
  require_origin(d_sim, DataOrigin::kSim, "init_surrogate");
  Mlp model = init_model(seed);
  const Eigen::MatrixXd x = input_matrix(d_sim, std::nullopt);
  model.per_speed_output = true;
  model.log_damping_inputs = true;
  model.input_norm = Scaler::fit(scaler_inputs(model, x));
  model.output_norm = Scaler::fit(per_speed(x, output_matrix(d_sim)));
  return model;
}

std::pair<Mlp, TrainReport> pretrain(Mlp model, const Dataset& d_sim, const PretrainConfig& cfg) {
  require_origin(d_sim, DataOrigin::kSim, "pretrain");
  if (cfg.steps < 0 || cfg.batch < 1) fail(ErrorCode::kConfig, "invalid pretraining schedule");
  const double t0 = monotonic_seconds();
  TrainReport report;
  report.stage = TrainStage::kPretrain;
  report.steps = cfg.steps;
  const Eigen::MatrixXd x = input_matrix(d_sim, std::nullopt);
  const Eigen::MatrixXd y = output_matrix(d_sim);
  const OutputVec w = mse_weights(model);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, x.cols() - 1);
  OptimState opt(model.num_params(), cfg.optim);
  Eigen::MatrixXd xb(kInputDim, cfg.batch), yb(kOutputDim, cfg.batch);
  for (long step = 0; step < cfg.steps; ++step) {
    for (int b = 0; b < cfg.batch; ++b) {
      const Eigen::Index j = pick(rng);
      xb.col(b) = x.col(j);
      yb.col(b) = y.col(j);
    }
    const LossGrad g = batch_loss(model, xb, yb, w, true, false);
    if (!std::isfinite(g.loss)) fail(ErrorCode::kNumeric, "pretraining loss diverged");
    report.loss_curve.push_back(g.loss);
    adamw_step(opt, model.params(), g.d_params);
  }
  report.final_loss = batch_loss(model, x, y, w, false, false).loss;
  report.initial_loss = report.loss_curve.empty() ? report.final_loss : report.loss_curve.front();
  model.meta.train_steps += cfg.steps;
  report.wall_clock_s = monotonic_seconds() - t0;
  return {std::move(model), std::move(report)};
}

double fit_ground_friction(const std::vector<SpeedTrace>& traces, double gravity,
                           double rest_speed, int min_moving) {
  double sum = 0.0;
  int used = 0;
  for (const SpeedTrace& tr : traces) {
    double st = 0.0, sv = 0.0, stt = 0.0, stv = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < tr.speed.size(); ++i) {
      if (!(tr.speed[i] > rest_speed)) continue;
      const double t = tr.dt * static_cast<double>(i);
      st += t;
      sv += tr.speed[i];
      stt += t * t;
      stv += t * tr.speed[i];
      ++n;
    }
    if (n < min_moving) continue;
    const double denom = n * stt - st * st;
    if (!(denom > 0.0)) continue;
    const double slope = (n * stv - st * sv) / denom;
    sum += std::abs(slope) / gravity;
    ++used;
  }
  if (used == 0) {
    fail(ErrorCode::kInsufficientData,
         "no slide trajectory has enough moving samples for friction regression");
  }
  return sum / used;
}

double fit_ground_friction(const Dataset& d_real, double gravity) {
  std::vector<SpeedTrace> traces;
  for (const CollisionSample& s : d_real.samples) {
    if (s.slide) traces.push_back(*s.slide);
  }
  return fit_ground_friction(traces, gravity);
}

double identification_loss(const Mlp& model, const Dataset& d, const ContactParams& p) {
  return batch_loss(model, input_matrix(d, p), output_matrix(d), mse_weights(model), false, false)
      .loss;
}

std::pair<ContactParams, TrainReport> identify_params(const Mlp& model, const Dataset& d_train,
                                                      BoxReparam init,
                                                      const IdentifyConfig& cfg) {
  if (d_train.samples.empty()) fail(ErrorCode::kInsufficientData, "identify_params: no data");
  if (cfg.steps < 0) fail(ErrorCode::kConfig, "identification steps must be >= 0");
  const double t0 = monotonic_seconds();
  std::array<bool, 4> free = cfg.free;
  if (cfg.mu2_prior) {
    ContactParams p = init.materialize();
    p.mu2 = *cfg.mu2_prior;
    const BoxReparam pinned = BoxReparam::from_params(p, {init.lo, init.hi});
    init.raw[1] = pinned.raw[1];
    free[1] = false;
  }

  Eigen::MatrixXd x = input_matrix(d_train, init.materialize());
  const Eigen::MatrixXd y = output_matrix(d_train);
  const OutputVec w = mse_weights(model);
  auto set_params = [&](const ContactParams& p) {
    const auto a = p.to_array();
    for (int i = 0; i < 4; ++i) x.row(kParamSlice + i).setConstant(a[i]);
  };
  auto loss_at = [&](const BoxReparam& r) {
    set_params(r.materialize());
    return batch_loss(model, x, y, w, false, false).loss;
  };

  TrainReport report;
  report.initial_loss = loss_at(init);
  if (cfg.steps > 0 && cfg.scan_levels > 1) init = scan_start(init, free, cfg.scan_levels, loss_at);

  report.stage = TrainStage::kSysId;
  report.steps = cfg.steps;
  AdamWConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = 0.0;
  OptimState opt(4, acfg);
  Eigen::Vector4d raw(init.raw[0], init.raw[1], init.raw[2], init.raw[3]);

  BoxReparam best = init;
  double best_loss = std::numeric_limits<double>::infinity();
  for (long step = 0; step < cfg.steps; ++step) {
    for (int i = 0; i < 4; ++i) init.raw[i] = raw(i);
    set_params(init.materialize());
    const LossGrad g = batch_loss(model, x, y, w, false, true);
    report.loss_curve.push_back(g.loss);
    if (g.loss < best_loss) {
      best_loss = g.loss;
      best = init;
    }
    const auto jac = init.jacobian();
    Eigen::Vector4d grad;
    for (int i = 0; i < 4; ++i) {
      grad(i) = free[i] ? g.d_inputs.row(kParamSlice + i).sum() * jac[i] : 0.0;
    }
    adamw_step(opt, raw, grad);
  }
  for (int i = 0; i < 4; ++i) init.raw[i] = raw(i);
  set_params(init.materialize());
  const double last = batch_loss(model, x, y, w, false, false).loss;
  if (last <= best_loss) {
    best_loss = last;
    best = init;
  }
  const ContactParams result = best.materialize();
  report.final_loss = best_loss;
  report.params = result;
  report.wall_clock_s = monotonic_seconds() - t0;
  return {result, std::move(report)};
}

namespace {

std::pair<Mlp, TrainReport> full_batch_train(Mlp model, const Eigen::MatrixXd& x,
                                             const Eigen::MatrixXd& y, long steps,
                                             const AdamWConfig& optim, TrainStage stage) {
  if (steps < 0) fail(ErrorCode::kConfig, "training steps must be >= 0");
  const double t0 = monotonic_seconds();
  TrainReport report;
  report.stage = stage;
  report.steps = steps;
  const OutputVec w = mse_weights(model);
  OptimState opt(model.num_params(), optim);
  for (long step = 0; step < steps; ++step) {
    const LossGrad g = batch_loss(model, x, y, w, true, false);
    if (!std::isfinite(g.loss)) fail(ErrorCode::kNumeric, "training loss diverged");
    report.loss_curve.push_back(g.loss);
    adamw_step(opt, model.params(), g.d_params);
  }
  report.final_loss = batch_loss(model, x, y, w, false, false).loss;
  report.initial_loss = report.loss_curve.empty() ? report.final_loss : report.loss_curve.front();
  model.meta.train_steps += steps;
  report.wall_clock_s = monotonic_seconds() - t0;
  return {std::move(model), std::move(report)};
}

}  // namespace

std::pair<Mlp, TrainReport> finetune(Mlp model, const Dataset& d_train,
                                     const ContactParams& params, const FinetuneConfig& cfg) {
  if (d_train.samples.empty()) fail(ErrorCode::kInsufficientData, "finetune: no data");
  auto out = full_batch_train(std::move(model), input_matrix(d_train, params),
                              output_matrix(d_train), cfg.steps, cfg.optim,
                              TrainStage::kFinetune);
  out.first.meta.contact_params = params;
  out.second.params = params;
  return out;
}

double relative_error(const PostImpact& pred, const PostImpact& truth, double r_g) {
  const Eigen::Vector3d t(truth.vn, truth.vt, truth.omega * r_g);
  const Eigen::Vector3d p(pred.vn, pred.vt, pred.omega * r_g);
  return (p - t).norm() / std::max(t.norm(), 1e-8);
}

double accuracy(const std::vector<PostImpact>& pred, const Dataset& d_test, double alpha,
                double r_g) {
  if (d_test.samples.empty()) fail(ErrorCode::kInsufficientData, "accuracy: empty test set");
  if (pred.size() != d_test.samples.size()) {
    fail(ErrorCode::kShapeMismatch, "accuracy: prediction count differs from the test set");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (relative_error(pred[i], d_test.samples[i].post, r_g) < alpha) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::vector<PostImpact> predict_surrogate(const Mlp& model, const ContactParams& p,
                                          const Dataset& d) {
  const Eigen::MatrixXd out = forward_batch(model, input_matrix(d, p));
  std::vector<PostImpact> pred(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    pred[i] = to_post(out.col(static_cast<Eigen::Index>(i)));
  }
  return pred;
}

std::vector<PostImpact> predict_full(const ShapeSpec& shape, const ImpactorSpec& impactor,
                                     const ContactParams& p, const Dataset& d,
                                     const SolverSettings& settings) {
  std::vector<PostImpact> pred(d.size());
  parallel_for(d.size(), [&](std::size_t i) {
    pred[i] = solve_impact_full(shape, impactor, d.samples[i].spec, p, settings);
  });
  return pred;
}

ContactParams baseline_grid_search(const ShapeSpec& shape, const ImpactorSpec& impactor,
                                   const Dataset& d_train, int resolution,
                                   const SolverSettings& settings) {
  if (resolution < 2) fail(ErrorCode::kConfig, "grid resolution must be at least 2");
  if (d_train.samples.empty()) fail(ErrorCode::kInsufficientData, "grid search: no data");
  const ParamBox box = param_box();
  const double r_g = shape.gyration_radius();
  std::size_t total = 1;
  for (int i = 0; i < 4; ++i) total *= static_cast<std::size_t>(resolution);
  auto node = [&](std::size_t index) {
    std::array<double, 4> a;
    for (int i = 0; i < 4; ++i) {
      const auto k = index % static_cast<std::size_t>(resolution);
      index /= static_cast<std::size_t>(resolution);
      a[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(k) / (resolution - 1);
    }
    return ContactParams::from_array(a);
  };
  std::vector<double> loss(total);
  parallel_for(total, [&](std::size_t g) {
    const ContactParams p = node(g);
    double sum = 0.0;
    for (const CollisionSample& s : d_train.samples) {
      const PostImpact q = solve_impact_full(shape, impactor, s.spec, p, settings);
      const double dvn = q.vn - s.post.vn, dvt = q.vt - s.post.vt;
      const double dw = (q.omega - s.post.omega) * r_g;
      sum += dvn * dvn + dvt * dvt + dw * dw;
    }
    loss[g] = sum / static_cast<double>(d_train.size());
  });
  const auto best = std::min_element(loss.begin(), loss.end()) - loss.begin();
  return node(static_cast<std::size_t>(best));
}

std::pair<Mlp, TrainReport> baseline_real_only(const Dataset& d_train, const RealOnlyConfig& cfg) {
  if (d_train.samples.empty()) fail(ErrorCode::kInsufficientData, "real-only: no data");
  const ContactParams mid = box_midpoint();
  const Eigen::MatrixXd x = input_matrix(d_train, mid);
  const Eigen::MatrixXd y = output_matrix(d_train);
  Mlp model = init_model(cfg.seed);
  model.per_speed_output = true;
  model.log_damping_inputs = true;
  model.input_norm = Scaler::fit(scaler_inputs(model, x));
  model.output_norm = Scaler::fit(per_speed(x, y));
  auto out = full_batch_train(std::move(model), x, y, cfg.steps, cfg.optim, TrainStage::kRealOnly);
  out.first.meta.contact_params = mid;
  return out;
}

}  // namespace impactlab
