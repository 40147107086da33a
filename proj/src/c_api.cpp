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

#include "impactlab/impactlab.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "impactlab/lab.hpp"
#include "json.hpp"

struct il_config {
  impactlab::RunConfig cfg;
};

struct il_engine {
  impactlab::HybridEngine engine;
  impactlab::ShapeSpec shape;
};

struct il_env {
  const il_engine* engine;
  impactlab::Route route;
  std::unique_ptr<impactlab::TaskEnv> env;
};

namespace {

using namespace impactlab;

thread_local std::string g_last_error;

template <class F>
il_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return IL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<il_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return IL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IL_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

ShapeSpec shape_named(const char* name) {
  require(name, "shape");
  const auto kind = parse_shape_kind(name);
  if (!kind) fail(ErrorCode::kInvalidArgument, std::string("unknown shape ") + name);
  return default_shape(*kind);
}

BodyState to_body(il_pose p) {
  BodyState b;
  b.pos = {p.x, p.y};
  b.heading = p.heading;
  return b;
}

il_pose to_pose(const BodyState& b) { return {b.pos.x(), b.pos.y(), b.heading}; }

ImpactSpec to_spec(il_spec s) { return {s.speed, s.point_param, s.deflection}; }

void put_obs(const Observation& o, double* obs) {
  if (!obs) return;
  const auto v = o.to_vector();
  for (std::size_t i = 0; i < v.size(); ++i) obs[i] = v[i];
}

}  // namespace

extern "C" {

const char* il_version(void) { return kToolVersion; }

const char* il_last_error(void) { return g_last_error.c_str(); }

const char* il_status_name(il_status status) {
  if (status == IL_OK) return "ok";
  if (status == IL_ERR_INTERNAL) return "internal";
  if (status < IL_ERR_CONFIG || status > IL_ERR_NO_FEASIBLE_STRIKE) return "unknown";
  return error_code_name(static_cast<ErrorCode>(status)).data();
}

int il_exit_code(il_status status) {
  if (status == IL_OK) return 0;
  if (status == IL_ERR_INTERNAL) return 3;
  return exit_code_for(static_cast<ErrorCode>(status));
}

void il_free_string(char* s) { std::free(s); }

void il_set_threads(unsigned n) { set_max_threads(n); }

il_status il_config_default(il_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new il_config{};
  });
}

il_status il_config_load(const char* path, il_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new il_config{load_run_config(path)};
  });
}

il_status il_config_parse(const char* json, il_config** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new il_config{run_config_from_json(json)};
  });
}

void il_config_free(il_config* cfg) { delete cfg; }

il_status il_config_set(il_config* cfg, const char* key, const char* json_value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(json_value, "value");
    apply_override(cfg->cfg, key, json_value);
  });
}

il_status il_config_get(const il_config* cfg, const char* key, char** json_value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    const nlohmann::json j = nlohmann::json::parse(run_config_to_json(cfg->cfg));
    std::string pointer = std::string("/") + key;
    for (char& c : pointer) {
      if (c == '.') c = '/';
    }
    const nlohmann::json::json_pointer ptr(pointer);
    if (!j.contains(ptr)) fail(ErrorCode::kConfig, std::string("unknown config key ") + key);
    put_string(json_value, j.at(ptr).dump());
  });
}

il_status il_config_to_json(const il_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    put_string(out, run_config_to_json(cfg->cfg));
  });
}

il_status il_config_hash(const il_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    put_string(out, config_hash(cfg->cfg));
  });
}

il_status il_gen_data(const il_config* cfg, int real, char** summary) {
  return guarded([&] {
    require(cfg, "cfg");
    put_string(summary, lab_gen_data(cfg->cfg, real ? DataOrigin::kRealProxy : DataOrigin::kSim));
  });
}

il_status il_train(const il_config* cfg, int skip_finetune, char** summary) {
  return guarded([&] {
    require(cfg, "cfg");
    put_string(summary, lab_train(cfg->cfg, skip_finetune != 0));
  });
}

il_status il_eval(const il_config* cfg, char** summary) {
  return guarded([&] {
    require(cfg, "cfg");
    put_string(summary, lab_eval(cfg->cfg));
  });
}

il_status il_plan(const il_config* cfg, char** summary) {
  return guarded([&] {
    require(cfg, "cfg");
    put_string(summary, lab_plan(cfg->cfg));
  });
}

il_status il_bench(const il_config* cfg, char** summary) {
  return guarded([&] {
    require(cfg, "cfg");
    put_string(summary, lab_bench(cfg->cfg));
  });
}

il_status il_route(const il_config* cfg, char** summary) {
  return guarded([&] {
    require(cfg, "cfg");
    put_string(summary, lab_route(cfg->cfg));
  });
}

il_status il_verify(const il_config* cfg, const char* dir_a, const char* dir_b, char** summary) {
  std::string text;
  const il_status st = guarded([&] {
    require(cfg, "cfg");
    require(dir_a, "dir_a");
    lab_verify(cfg->cfg, dir_a, dir_b ? dir_b : "", &text);
  });
  if (!text.empty() && summary) {
    const std::string saved = g_last_error;
    const il_status put = guarded([&] { put_string(summary, text); });
    g_last_error = saved;
    if (put != IL_OK) return put;
  }
  return st;
}

il_status il_engine_full(const char* shape, const double params[4], il_engine** out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    const ShapeSpec s = shape_named(shape);
    const ContactParams p{params[0], params[1], params[2], params[3]};
    *out = new il_engine{HybridEngine::full_solver(s.kind, p), s};
  });
}

il_status il_engine_hybrid(const char* shape, const char* checkpoint_path, il_engine** out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    const ShapeSpec s = shape_named(shape);
    auto model = std::make_shared<const Mlp>(load_checkpoint(checkpoint_path));
    if (!model->meta.contact_params) {
      fail(ErrorCode::kConfig, "checkpoint carries no contact parameters");
    }
    const ContactParams p = *model->meta.contact_params;
    *out = new il_engine{HybridEngine::surrogate(s.kind, std::move(model), p), s};
  });
}

il_status il_engine_real(const char* shape, const il_config* cfg, il_engine** out) {
  return guarded([&] {
    require(out, "out");
    const ShapeSpec s = shape_named(shape);
    const RealityConfig r = cfg ? cfg->cfg.reality : RealityConfig{};
    *out = new il_engine{HybridEngine::real_proxy(s.kind, r), s};
  });
}

void il_engine_free(il_engine* engine) { delete engine; }

il_status il_strike(const il_engine* engine, il_pose start, il_spec spec, il_pose* resting) {
  return guarded([&] {
    require(engine, "engine");
    require(resting, "resting");
    const StrikeOutcome o =
        strike_and_settle(engine->engine, engine->shape, ImpactorSpec{}, to_body(start), to_spec(spec));
    *resting = to_pose(o.resting);
  });
}

il_status il_plan_strike(const il_engine* engine, il_pose start, il_pose target, uint64_t seed,
                         long max_evals, il_spec* best, double* loss) {
  return guarded([&] {
    require(engine, "engine");
    require(best, "best");
    SearchObjective obj;
    obj.target_pos = {target.x, target.y};
    obj.target_heading = target.heading;
    obj.engine = &engine->engine;
    obj.shape = engine->shape;
    obj.start = to_body(start);
    CmaConfig cfg;
    cfg.seed = seed;
    if (max_evals > 0) cfg.max_evals = max_evals;
    const PlanResult r = plan_strike(obj, cfg);
    *best = {r.best_spec.speed, r.best_spec.point_param, r.best_spec.deflection};
    if (loss) *loss = r.best_loss;
  });
}

il_status il_env_create(const il_engine* engine, int fixture, const char* route_json,
                        il_env** out) {
  return guarded([&] {
    require(engine, "engine");
    require(out, "out");
    auto e = std::make_unique<il_env>();
    e->engine = engine;
    e->route = route_json ? route_from_json(route_json) : fixture_route(fixture);
    e->env = std::make_unique<TaskEnv>(engine->engine, engine->shape, ImpactorSpec{}, e->route);
    *out = e.release();
  });
}

void il_env_free(il_env* env) { delete env; }

il_status il_env_reset(il_env* env, uint64_t seed, double obs[IL_OBS_DIM]) {
  return guarded([&] {
    require(env, "env");
    put_obs(env->env->reset(route_start_pose(env->route, seed, kPi / 6)), obs);
  });
}

il_status il_env_step(il_env* env, il_spec spec, double obs[IL_OBS_DIM], double* reward,
                      int* done) {
  return guarded([&] {
    require(env, "env");
    const StepResult r = env->env->step(to_spec(spec));
    put_obs(r.obs, obs);
    if (reward) *reward = r.reward.terms.total();
    if (done) *done = r.done ? 1 : 0;
  });
}

il_status il_env_observe(const il_env* env, double obs[IL_OBS_DIM]) {
  return guarded([&] {
    require(env, "env");
    put_obs(env->env->observe(), obs);
  });
}

size_t il_env_num_subgoals(const il_env* env) { return env ? env->env->subgoals().size() : 0; }

}  // extern "C"
