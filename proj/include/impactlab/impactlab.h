/* Copyright 2026 The impactlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Stable C interface to libimpactlab.
 *
 * Every fallible call returns an il_status. On failure the message is
 * available from il_last_error() on the calling thread until the next call.
 * Strings returned through char** are heap-allocated by the library and must
 * be released with il_free_string(). Handles are opaque and released with
 * their *_free function; freeing NULL is a no-op. */

#ifndef IMPACTLAB_IMPACTLAB_H_
#define IMPACTLAB_IMPACTLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IL_API __declspec(dllexport)
#else
#define IL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum il_status {
  IL_OK = 0,
  IL_ERR_CONFIG = 1,
  IL_ERR_IO = 2,
  IL_ERR_NUMERIC = 3,
  IL_ERR_INVALID_ARGUMENT = 4,
  IL_ERR_NO_CONTACT = 5,
  IL_ERR_NON_CONVERGENCE = 6,
  IL_ERR_INSUFFICIENT_DATA = 7,
  IL_ERR_SHAPE_MISMATCH = 8,
  IL_ERR_ENVELOPE_VIOLATION = 9,
  IL_ERR_DEGENERATE_ROUTE = 10,
  IL_ERR_NO_FEASIBLE_STRIKE = 11,
  IL_ERR_INTERNAL = 99
} il_status;

IL_API const char* il_version(void);
IL_API const char* il_last_error(void);
IL_API const char* il_status_name(il_status status);
/* Process exit code for a status: 0 ok, 1 config, 2 IO, 3 numeric. */
IL_API int il_exit_code(il_status status);
IL_API void il_free_string(char* s);
/* Caps internal parallelism; 0 restores machine parallelism. */
IL_API void il_set_threads(unsigned n);

/* ---- Run configuration -------------------------------------------------- */

typedef struct il_config il_config;

IL_API il_status il_config_default(il_config** out);
IL_API il_status il_config_load(const char* path, il_config** out);
IL_API il_status il_config_parse(const char* json, il_config** out);
IL_API void il_config_free(il_config* cfg);
/* Sets a dotted field such as "data.n_sim" from a JSON literal. */
IL_API il_status il_config_set(il_config* cfg, const char* key, const char* json_value);
/* Reads a dotted field as a JSON literal. */
IL_API il_status il_config_get(const il_config* cfg, const char* key, char** json_value);
IL_API il_status il_config_to_json(const il_config* cfg, char** out);
IL_API il_status il_config_hash(const il_config* cfg, char** out);

/* ---- Experiment commands ------------------------------------------------ */
/* Each writes its artifacts under the configured out_dir and returns a JSON
 * summary (may be NULL if not wanted). */

IL_API il_status il_gen_data(const il_config* cfg, int real, char** summary);
IL_API il_status il_train(const il_config* cfg, int skip_finetune, char** summary);
IL_API il_status il_eval(const il_config* cfg, char** summary);
IL_API il_status il_plan(const il_config* cfg, char** summary);
IL_API il_status il_bench(const il_config* cfg, char** summary);
IL_API il_status il_route(const il_config* cfg, char** summary);
/* Checks report hashes in dir_a; compares against dir_b when non-NULL. The
 * summary is filled even when verification fails (IL_ERR_CONFIG). */
IL_API il_status il_verify(const il_config* cfg, const char* dir_a, const char* dir_b,
                           char** summary);

/* ---- Engines ------------------------------------------------------------ */

typedef struct il_engine il_engine;

typedef struct il_pose {
  double x, y, heading;
} il_pose;

typedef struct il_spec {
  double speed, point_param, deflection;
} il_spec;

/* Shapes are named "semidisc", "square" or "triangle" and use default sizes.
 * params are (mu1, mu2, e1, e2). */
IL_API il_status il_engine_full(const char* shape, const double params[4], il_engine** out);
/* Surrogate engine from a checkpoint whose metadata carries the parameters. */
IL_API il_status il_engine_hybrid(const char* shape, const char* checkpoint_path,
                                  il_engine** out);
/* Real-world proxy; cfg supplies the reality settings, NULL for defaults. */
IL_API il_status il_engine_real(const char* shape, const il_config* cfg, il_engine** out);
IL_API void il_engine_free(il_engine* engine);

IL_API il_status il_strike(const il_engine* engine, il_pose start, il_spec spec,
                           il_pose* resting);
IL_API il_status il_plan_strike(const il_engine* engine, il_pose start, il_pose target,
                                uint64_t seed, long max_evals, il_spec* best, double* loss);

/* ---- Pushing environment ------------------------------------------------ */
/* Observation layout: x, y, sub-goal offset along and across the travel
 * direction, sub-goal heading minus travel direction. */

#define IL_OBS_DIM 5

typedef struct il_env il_env;

/* Route from a fixture number (1..3) or, when route_json is non-NULL, from a
 * JSON polyline. The engine must outlive the environment. */
IL_API il_status il_env_create(const il_engine* engine, int fixture, const char* route_json,
                               il_env** out);
IL_API void il_env_free(il_env* env);
/* Start at the route's first waypoint; heading jittered by seed when the
 * route allows it. */
IL_API il_status il_env_reset(il_env* env, uint64_t seed, double obs[IL_OBS_DIM]);
IL_API il_status il_env_step(il_env* env, il_spec spec, double obs[IL_OBS_DIM], double* reward,
                             int* done);
IL_API il_status il_env_observe(const il_env* env, double obs[IL_OBS_DIM]);
IL_API size_t il_env_num_subgoals(const il_env* env);

#ifdef __cplusplus
}
#endif

#endif /* IMPACTLAB_IMPACTLAB_H_ */
