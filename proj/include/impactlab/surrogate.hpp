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

// Parameter-conditioned collision surrogate: a 7-128-128-3 ReLU network with
// hand-written reverse mode, plus AdamW.
//
// Input vector:  [speed, point_param, deflection, mu1, mu2, e1, e2]
// Output vector: [vn, vt, omega] in the impact frame.
//
// Inputs and outputs pass through per-feature affine scalers inside forward();
// callers always work in physical units.

#ifndef IMPACTLAB_SURROGATE_HPP_
#define IMPACTLAB_SURROGATE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "impactlab/physics.hpp"

namespace impactlab {

inline constexpr int kInputDim = 7;
inline constexpr int kOutputDim = 3;
inline constexpr int kSpecSlice = 0;   // first spec feature
inline constexpr int kParamSlice = 3;  // first contact-parameter feature

using InputVec = Eigen::Matrix<double, kInputDim, 1>;
using OutputVec = Eigen::Matrix<double, kOutputDim, 1>;

struct SurrogateInput {
  ImpactSpec spec;
  ContactParams params;

  InputVec to_vector() const;
};

OutputVec to_vector(const PostImpact& post);
PostImpact to_post(const OutputVec& v);

// y = (x - mean) / scale per feature.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Scaler identity(int dim);
  // Mean / population std per row of `data` (features x samples); features
  // with zero spread keep scale 1.
  static Scaler fit(const Eigen::MatrixXd& data);

  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& z) const;
  bool valid(int dim) const;
};

struct ModelMeta {
  std::uint64_t seed = 0;
  long train_steps = 0;
  std::optional<ContactParams> contact_params;
};

// Weights live in one flat vector so the optimizer and gradient checks can
// treat the network as a point in R^n. Layer l occupies a column-major
// (out x in) weight block followed by its bias.
class Mlp {
 public:
  Mlp();  // all-zero parameters, identity scalers
  explicit Mlp(std::vector<int> layer_dims);

  const std::vector<int>& layer_dims() const { return dims_; }
  int num_layers() const { return static_cast<int>(dims_.size()) - 1; }
  Eigen::Index num_params() const { return params_.size(); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  Scaler input_norm;
  Scaler output_norm;
  // When set, the denormalized network output is the post-impact state per
  // unit impact speed and forward() multiplies it by the speed feature.
  // Contact dynamics are close to homogeneous in speed, so this is much
  // easier to fit than the raw state.
  bool per_speed_output = false;
  // When set, the damping ratios enter the input scaler as logarithms. The
  // restitution they control varies almost entirely over the low end of
  // their range.
  bool log_damping_inputs = false;
  ModelMeta meta;

 private:
  Eigen::Index weight_offset(int layer) const;
  Eigen::Index bias_offset(int layer) const;

  std::vector<int> dims_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

std::vector<int> default_layer_dims();

// He-style fan-in initialization, zero biases.
Mlp init_model(std::uint64_t seed);

PostImpact forward(const Mlp& model, const SurrogateInput& input);
OutputVec forward(const Mlp& model, const InputVec& x);
// Batched forward; columns are samples, physical units in and out.
Eigen::MatrixXd forward_batch(const Mlp& model, const Eigen::MatrixXd& x);

// Weighted squared error averaged over a batch:
//   L = (1/B) sum_b sum_k w_k (f(x_b)_k - y_b,k)^2
// Optionally fills the gradient w.r.t. the flat parameters and w.r.t. the
// raw (un-normalized) inputs.
struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd d_params;
  Eigen::MatrixXd d_inputs;
};
// Raw inputs mapped to what the input scaler sees.
Eigen::MatrixXd scaler_inputs(const Mlp& model, const Eigen::MatrixXd& x);

// sample_weights, when given, scales each column's term.
LossGrad loss_and_grad(const Mlp& model, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& y, const OutputVec& weights,
                       bool want_params, bool want_inputs,
                       const Eigen::VectorXd* sample_weights = nullptr);

// Output weights that make the loss an MSE in normalized output units.
OutputVec normalized_loss_weights(const Mlp& model);

// Gradient of ||forward(input) - target||^2 w.r.t. all weights and biases.
Eigen::VectorXd backward_weights(const Mlp& model, const SurrogateInput& input,
                                 const PostImpact& target);
// Gradient of the same loss w.r.t. (mu1, mu2, e1, e2) only.
std::array<double, 4> backward_params(const Mlp& model, const SurrogateInput& input,
                                      const PostImpact& target);

struct AdamWConfig {
  double lr = 1e-3;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimState {
  AdamWConfig config;
  long step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;

  OptimState() = default;
  OptimState(Eigen::Index n, AdamWConfig cfg);
};

// Decoupled weight decay Adam. Throws kShapeMismatch on size disagreement.
void adamw_step(OptimState& state, Eigen::Ref<Eigen::VectorXd> params,
                const Eigen::Ref<const Eigen::VectorXd>& grads);

// Checkpoint JSON: {layer_dims, weights (row-major, per layer), biases,
// input_norm, output_norm, meta}. Loading rejects dimension-inconsistent
// documents with kShapeMismatch and malformed ones with kConfig.
std::string checkpoint_to_json(const Mlp& model);
Mlp checkpoint_from_json(const std::string& text);
void save_checkpoint(const Mlp& model, const std::string& path);  // kIo on failure
Mlp load_checkpoint(const std::string& path);

}  // namespace impactlab

#endif  // IMPACTLAB_SURROGATE_HPP_
