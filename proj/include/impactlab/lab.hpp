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

// End-to-end experiment driver behind the command-line tool: one JSON run
// configuration, named seed streams, fixed output filenames and reports that
// embed the configuration hash.

#ifndef IMPACTLAB_LAB_HPP_
#define IMPACTLAB_LAB_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "impactlab/pipeline.hpp"
#include "impactlab/taskenv.hpp"

namespace impactlab {

inline constexpr const char* kToolVersion = "impactlab 0.1.0";

// Reference search times for the semi-disc, used as a printed comparison.
inline constexpr double kReferenceFullSearchS = 27.42;
inline constexpr double kReferenceHybridSearchS = 15.81;

struct DataSizes {
  long n_sim = kDefaultSimSamples;
  long n_real = kDefaultRealSamples;
  long n_train = kDefaultRealTrain;
};

struct Schedule {
  long pretrain = 1000;
  long identify = 1000;
  long finetune = 10;
  long real_only = 1000;
  long overfit = 1000;  // long fine-tune reported next to the short one
};

struct PlanSettings {
  long max_evals = 700;
  double sigma0 = 0.3;
  int targets = 5;
  int trials = 5;
};

struct RouteSettings {
  int trials = 10;
  std::vector<int> fixtures{1, 2, 3};
  std::vector<std::string> files;  // extra JSON route files
};

struct RunConfig {
  ShapeSpec shape = default_shape(ShapeKind::kSemiDisc);
  ImpactorSpec impactor;
  RealityConfig reality;
  DataSizes data;
  Schedule schedule;
  PlanSettings plan;
  RouteSettings routes;
  std::vector<double> alphas{0.1};
  std::uint64_t seed = 0;
  // Runtime settings, excluded from the hash.
  std::string out_dir = "out";
  unsigned threads = 0;

  void validate() const;  // kConfig
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);
// Sets a dotted field ("data.n_sim") from a JSON literal ("100").
void apply_override(RunConfig& cfg, const std::string& key, const std::string& json_value);
// Hex FNV-1a over the canonical JSON of every result-affecting field.
std::string config_hash(const RunConfig& cfg);

// Named seed streams; each stage draws substreams from its own.
struct SeedStreams {
  std::uint64_t data, init, train, plan, eval;
  explicit SeedStreams(std::uint64_t master);
};

// Fixed filenames under out_dir.
std::string out_path(const RunConfig& cfg, const std::string& name);
inline constexpr const char* kSimDatasetFile = "dataset.jsonl";
inline constexpr const char* kRealDatasetFile = "dataset_real.jsonl";
inline constexpr const char* kBaseCkptFile = "ckpt_base.json";
inline constexpr const char* kIdentCkptFile = "ckpt_ident.json";
inline constexpr const char* kFinalCkptFile = "ckpt_final.json";

// Each command writes its artifacts and returns a JSON summary.
std::string lab_gen_data(const RunConfig& cfg, DataOrigin origin);
std::string lab_train(const RunConfig& cfg, bool skip_finetune);
std::string lab_eval(const RunConfig& cfg);
std::string lab_plan(const RunConfig& cfg);
std::string lab_bench(const RunConfig& cfg);
std::string lab_route(const RunConfig& cfg);
// Checks every report in dir_a against the config hash and, when dir_b is
// non-empty, compares all artifacts of both directories with wall-clock
// fields removed. Mismatches raise kConfig after the summary is built; the
// summary is returned through `summary` either way.
void lab_verify(const RunConfig& cfg, const std::string& dir_a, const std::string& dir_b,
                std::string* summary);

// Report text with every wall-clock field removed (JSON keys or CSV columns
// containing "wall_clock").
std::string strip_wall_clock(const std::string& name, const std::string& text);

}  // namespace impactlab

#endif  // IMPACTLAB_LAB_HPP_
