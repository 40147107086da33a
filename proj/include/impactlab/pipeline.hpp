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

// Distill, identify, adapt: dataset generation, surrogate pretraining,
// ground-friction regression, contact-parameter identification through the
// frozen network, early-stopped fine-tuning, and the accuracy metric.

#ifndef IMPACTLAB_PIPELINE_HPP_
#define IMPACTLAB_PIPELINE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "impactlab/physics.hpp"
#include "impactlab/surrogate.hpp"

namespace impactlab {

enum class DataOrigin { kSim, kRealProxy };
std::string_view origin_name(DataOrigin origin);

// Linear speed of the block sampled while it slides after a real strike.
struct SpeedTrace {
  double dt = 0.0;
  std::vector<double> speed;
};

struct CollisionSample {
  ImpactSpec spec;
  std::optional<ContactParams> params;  // sim data only
  PostImpact post;
  std::optional<SpeedTrace> slide;  // real data only
};

struct Dataset {
  DataOrigin origin = DataOrigin::kSim;
  ShapeKind shape = ShapeKind::kSemiDisc;
  std::uint64_t seed = 0;
  std::vector<CollisionSample> samples;

  std::size_t size() const { return samples.size(); }
  // Checks non-emptiness, homogeneity and finiteness; kConfig on violation.
  void validate() const;
};

inline constexpr int kDatasetSchemaVersion = 1;

// JSON lines: a header {schema_version, shape, origin, seed, n} and then one
// sample per line.
std::string dataset_to_jsonl(const Dataset& ds);
Dataset dataset_from_jsonl(const std::string& text);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

inline constexpr long kDefaultSimSamples = 20000;
inline constexpr long kDefaultRealSamples = 110;
inline constexpr long kDefaultRealTrain = 10;

Dataset generate_sim_dataset(const ShapeSpec& shape, const ImpactorSpec& impactor, long n,
                             std::uint64_t seed, const SolverSettings& settings = {});

// Slides are recorded every `trace_stride` slide steps.
Dataset generate_real_dataset(const RealityConfig& reality, const ShapeSpec& shape,
                              const ImpactorSpec& impactor, long n, std::uint64_t seed,
                              const SolverSettings& settings = {}, int trace_stride = 5);

// First n_train samples and the rest.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t n_train);

// Logistic box reparameterization: p = lo + (hi - lo) * sigmoid(raw).
struct BoxReparam {
  std::array<double, 4> raw{0.0, 0.0, 0.0, 0.0};
  std::array<double, 4> lo;
  std::array<double, 4> hi;

  static BoxReparam midpoint(const ParamBox& box = param_box());
  // Values are clamped a hair inside the box first.
  static BoxReparam from_params(const ContactParams& p, const ParamBox& box = param_box());
  ContactParams materialize() const;
  std::array<double, 4> jacobian() const;  // dp_i / draw_i
};

enum class TrainStage { kPretrain, kSysId, kFinetune, kRealOnly };
std::string_view stage_name(TrainStage stage);

struct TrainReport {
  TrainStage stage = TrainStage::kPretrain;
  long steps = 0;
  double initial_loss = 0.0;       // at the caller's starting point
  std::vector<double> loss_curve;  // loss before each update
  double final_loss = 0.0;         // after the last update
  std::optional<ContactParams> params;
  double wall_clock_s = 0.0;
};

// He init plus input/output scalers fit on the simulation data.
Mlp init_surrogate(const Dataset& d_sim, std::uint64_t seed);

struct PretrainConfig {
  long steps = 1000;
  int batch = 256;
  AdamWConfig optim{};
  std::uint64_t seed = 0;  // mini-batch sampling
};

// Mini-batch MSE in normalized output units.
std::pair<Mlp, TrainReport> pretrain(Mlp model, const Dataset& d_sim,
                                     const PretrainConfig& cfg = {});

// Least-squares slope of speed against time per trajectory; mu2 = |slope| / g
// averaged over usable trajectories. kInsufficientData if no trajectory has
// at least min_moving samples above rest_speed.
double fit_ground_friction(const std::vector<SpeedTrace>& traces, double gravity = 9.81,
                           double rest_speed = 1e-3, int min_moving = 5);
double fit_ground_friction(const Dataset& d_real, double gravity = 9.81);

struct IdentifyConfig {
  long steps = 1000;
  double lr = 1e-2;
  // Entries with free[i] == false keep their initial value.
  std::array<bool, 4> free{true, true, true, true};
  // Regressed ground friction; pins mu2 when present.
  std::optional<double> mu2_prior;
  // Before descending, the free parameters are scanned on a grid of this
  // many levels per axis and descent starts from the best grid point (or
  // from init if that is better). The damping-to-restitution map is flat
  // above a damping ratio of 1, which covers the box midpoint, so a single
  // start there sees almost no gradient. 0 or 1 disables the scan.
  int scan_levels = 5;
};

// Gradient descent on the raw box parameters with the network frozen.
// Returns the iterate with the lowest loss. steps == 0 returns init as is.
std::pair<ContactParams, TrainReport> identify_params(const Mlp& model, const Dataset& d_train,
                                                      BoxReparam init,
                                                      const IdentifyConfig& cfg = {});

// Mean identification loss on a dataset at fixed parameters.
double identification_loss(const Mlp& model, const Dataset& d, const ContactParams& p);

// A fresh AdamW moves every weight by about lr in its first update; at the
// pretraining rate of 1e-3 that jolt raises the training loss several-fold
// on a 10-sample batch, so fine-tuning uses a smaller step.
inline constexpr double kFinetuneLr = 1e-4;

struct FinetuneConfig {
  long steps = 10;
  AdamWConfig optim{kFinetuneLr};
};

// Full-batch AdamW on the real data with the parameters held fixed.
std::pair<Mlp, TrainReport> finetune(Mlp model, const Dataset& d_train,
                                     const ContactParams& params,
                                     const FinetuneConfig& cfg = {});

// Homogenized relative error ||pred - truth|| / max(||truth||, 1e-8) over
// [vn, vt, omega * r_g].
double relative_error(const PostImpact& pred, const PostImpact& truth, double r_g);
double accuracy(const std::vector<PostImpact>& pred, const Dataset& d_test, double alpha,
                double r_g);

std::vector<PostImpact> predict_surrogate(const Mlp& model, const ContactParams& p,
                                          const Dataset& d);
std::vector<PostImpact> predict_full(const ShapeSpec& shape, const ImpactorSpec& impactor,
                                     const ContactParams& p, const Dataset& d,
                                     const SolverSettings& settings = {});

// Exhaustive search over a resolution^4 grid spanning the parameter box,
// minimizing the mean homogenized squared error on d_train.
ContactParams baseline_grid_search(const ShapeSpec& shape, const ImpactorSpec& impactor,
                                   const Dataset& d_train, int resolution = 5,
                                   const SolverSettings& settings = {});

// Network fit to the real samples alone, no simulation pretraining. The
// unknown parameters are fed at the box midpoint.
struct RealOnlyConfig {
  long steps = 1000;
  AdamWConfig optim{};
  std::uint64_t seed = 0;
};
std::pair<Mlp, TrainReport> baseline_real_only(const Dataset& d_train,
                                               const RealOnlyConfig& cfg = {});
ContactParams box_midpoint();

}  // namespace impactlab

#endif  // IMPACTLAB_PIPELINE_HPP_
