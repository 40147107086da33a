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

#include "impactlab/surrogate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

namespace impactlab {

InputVec SurrogateInput::to_vector() const {
  InputVec x;
  x << spec.speed, spec.point_param, spec.deflection, params.mu1, params.mu2,
      params.e1, params.e2;
  return x;
}

OutputVec to_vector(const PostImpact& post) {
  return OutputVec(post.vn, post.vt, post.omega);
}

PostImpact to_post(const OutputVec& v) { return {v(0), v(1), v(2)}; }

Scaler Scaler::identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Scaler Scaler::fit(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.cols();
  if (n == 0) fail(ErrorCode::kInvalidArgument, "cannot fit a scaler on no samples");
  Scaler s;
  s.mean = data.rowwise().mean();
  s.scale.resize(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double var = (data.row(i).array() - s.mean(i)).square().sum() /
                       static_cast<double>(n);
    const double sd = std::sqrt(var);
    s.scale(i) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Eigen::VectorXd Scaler::normalize(const Eigen::VectorXd& x) const {
  return ((x - mean).array() / scale.array()).matrix();
}

Eigen::VectorXd Scaler::denormalize(const Eigen::VectorXd& z) const {
  return (z.array() * scale.array()).matrix() + mean;
}

bool Scaler::valid(int dim) const {
  return mean.size() == dim && scale.size() == dim && mean.allFinite() &&
         (scale.array() > 0.0).all() && scale.allFinite();
}

std::vector<int> default_layer_dims() { return {kInputDim, 128, 128, kOutputDim}; }

Mlp::Mlp() : Mlp(default_layer_dims()) {}

Mlp::Mlp(std::vector<int> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) fail(ErrorCode::kShapeMismatch, "an MLP needs at least two layer dims");
  for (int d : dims_) {
    if (d <= 0) fail(ErrorCode::kShapeMismatch, "layer dims must be positive");
  }
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<Eigen::Index>(dims_[l + 1]) * dims_[l] + dims_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(offset);
  input_norm = Scaler::identity(dims_.front());
  output_norm = Scaler::identity(dims_.back());
}

Eigen::Index Mlp::weight_offset(int layer) const { return offsets_.at(layer); }

Eigen::Index Mlp::bias_offset(int layer) const {
  return offsets_.at(layer) + static_cast<Eigen::Index>(dims_[layer + 1]) * dims_[layer];
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int layer) {
  return {params_.data() + weight_offset(layer), dims_[layer + 1], dims_[layer]};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + weight_offset(layer), dims_[layer + 1], dims_[layer]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(int layer) {
  return {params_.data() + bias_offset(layer), dims_[layer + 1]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offset(layer), dims_[layer + 1]};
}

Mlp init_model(std::uint64_t seed) {
  Mlp model;
  std::mt19937_64 rng(seed);
  for (int l = 0; l < model.num_layers(); ++l) {
    auto w = model.weight(l);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(w.cols())));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
  }
  model.meta.seed = seed;
  return model;
}

namespace {

// Forward pass keeping pre-activations for the backward sweep.
struct Tape {
  std::vector<Eigen::MatrixXd> pre;   // per layer, before activation
  std::vector<Eigen::MatrixXd> post;  // post[0] = normalized input
  Eigen::MatrixXd per_speed;          // denormalized output before the speed factor
};

constexpr int kFirstDamping = kParamSlice + 2;

Eigen::MatrixXd run_forward(const Mlp& model, const Eigen::MatrixXd& x, Tape* tape) {
  Eigen::MatrixXd a = (scaler_inputs(model, x).colwise() - model.input_norm.mean).array().colwise() /
                      model.input_norm.scale.array();
  if (tape != nullptr) tape->post.push_back(a);
  const int layers = model.num_layers();
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd h = model.weight(l) * a;
    h.colwise() += model.bias(l);
    if (tape != nullptr) tape->pre.push_back(h);
    if (l + 1 < layers) {
      a = h.cwiseMax(0.0);
      if (tape != nullptr) tape->post.push_back(a);
    } else {
      a = std::move(h);
    }
  }
  Eigen::MatrixXd y = a.array().colwise() * model.output_norm.scale.array();
  y.colwise() += model.output_norm.mean;
  if (model.per_speed_output) {
    if (tape != nullptr) tape->per_speed = y;
    y.array().rowwise() *= x.row(kSpecSlice).array();
  }
  return y;
}

}  // namespace

Eigen::MatrixXd scaler_inputs(const Mlp& model, const Eigen::MatrixXd& x) {
  if (!model.log_damping_inputs) return x;
  Eigen::MatrixXd z = x;
  z.middleRows(kFirstDamping, 2) = x.middleRows(kFirstDamping, 2).array().log();
  return z;
}

OutputVec forward(const Mlp& model, const InputVec& x) {
  const Eigen::MatrixXd y = run_forward(model, x, nullptr);
  return y.col(0);
}

PostImpact forward(const Mlp& model, const SurrogateInput& input) {
  return to_post(forward(model, input.to_vector()));
}

Eigen::MatrixXd forward_batch(const Mlp& model, const Eigen::MatrixXd& x) {
  if (x.rows() != model.layer_dims().front()) {
    fail(ErrorCode::kShapeMismatch, "input rows do not match the model input width");
  }
  return run_forward(model, x, nullptr);
}

LossGrad loss_and_grad(const Mlp& model, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& y, const OutputVec& weights,
                       bool want_params, bool want_inputs,
                       const Eigen::VectorXd* sample_weights) {
  if (x.cols() != y.cols() || x.rows() != model.layer_dims().front() ||
      y.rows() != model.layer_dims().back()) {
    fail(ErrorCode::kShapeMismatch, "batch shapes do not match the model");
  }
  if (sample_weights != nullptr && sample_weights->size() != x.cols()) {
    fail(ErrorCode::kShapeMismatch, "sample weights do not match the batch");
  }
  const double inv_batch = 1.0 / static_cast<double>(x.cols());
  Tape tape;
  const Eigen::MatrixXd pred = run_forward(model, x, &tape);
  Eigen::MatrixXd diff = pred - y;

  LossGrad out;
  Eigen::MatrixXd sq = diff.array().square().colwise() * weights.array();
  if (sample_weights != nullptr) sq.array().rowwise() *= sample_weights->transpose().array();
  out.loss = sq.sum() * inv_batch;
  if (!want_params && !want_inputs) return out;

  // dL/d(output), then through the speed factor and the output scaler.
  diff.array().colwise() *= 2.0 * inv_batch * weights.array();
  if (sample_weights != nullptr) diff.array().rowwise() *= sample_weights->transpose().array();
  Eigen::MatrixXd delta = diff;
  if (model.per_speed_output) delta.array().rowwise() *= x.row(kSpecSlice).array();
  delta.array().colwise() *= model.output_norm.scale.array();
  if (want_params) out.d_params = Eigen::VectorXd::Zero(model.num_params());
  Mlp grad_view(model.layer_dims());
  for (int l = model.num_layers() - 1; l >= 0; --l) {
    if (want_params) {
      grad_view.weight(l) = delta * tape.post[l].transpose();
      grad_view.bias(l) = delta.rowwise().sum();
    }
    if (l == 0 && !want_inputs) break;
    Eigen::MatrixXd back = model.weight(l).transpose() * delta;
    if (l > 0) {
      delta = (tape.pre[l - 1].array() > 0.0).select(back, 0.0);
    } else {
      out.d_inputs = back.array().colwise() / model.input_norm.scale.array();
      if (model.log_damping_inputs) {
        out.d_inputs.middleRows(kFirstDamping, 2).array() /= x.middleRows(kFirstDamping, 2).array();
      }
      if (model.per_speed_output) {
        out.d_inputs.row(kSpecSlice) += (diff.array() * tape.per_speed.array()).colwise().sum().matrix();
      }
    }
  }
  if (want_params) out.d_params = grad_view.params();
  return out;
}

OutputVec normalized_loss_weights(const Mlp& model) {
  return model.output_norm.scale.array().square().inverse().matrix();
}

Eigen::VectorXd backward_weights(const Mlp& model, const SurrogateInput& input,
                                 const PostImpact& target) {
  return loss_and_grad(model, input.to_vector(), to_vector(target), OutputVec::Ones(),
                       true, false)
      .d_params;
}

std::array<double, 4> backward_params(const Mlp& model, const SurrogateInput& input,
                                      const PostImpact& target) {
  const LossGrad g = loss_and_grad(model, input.to_vector(), to_vector(target),
                                   OutputVec::Ones(), false, true);
  return {g.d_inputs(kParamSlice, 0), g.d_inputs(kParamSlice + 1, 0),
          g.d_inputs(kParamSlice + 2, 0), g.d_inputs(kParamSlice + 3, 0)};
}

OptimState::OptimState(Eigen::Index n, AdamWConfig cfg)
    : config(cfg), m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}

void adamw_step(OptimState& state, Eigen::Ref<Eigen::VectorXd> params,
                const Eigen::Ref<const Eigen::VectorXd>& grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    std::ostringstream msg;
    msg << "adamw_step: params " << params.size() << ", grads " << grads.size()
        << ", moments " << state.m.size();
    fail(ErrorCode::kShapeMismatch, msg.str());
  }
  const AdamWConfig& c = state.config;
  ++state.step;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grads;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grads.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const Eigen::ArrayXd m_hat = state.m.array() / bc1;
  const Eigen::ArrayXd v_hat = state.v.array() / bc2;
  params.array() -= c.lr * c.weight_decay * params.array();
  params.array() -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
}

namespace {

using nlohmann::json;

json scaler_json(const Scaler& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
}

Scaler scaler_from(const json& j, int dim, const char* name) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  Scaler s;
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  if (!s.valid(dim)) {
    fail(ErrorCode::kShapeMismatch, std::string("checkpoint ") + name + " is inconsistent");
  }
  return s;
}

}  // namespace

std::string checkpoint_to_json(const Mlp& model) {
  json weights = json::array();
  json biases = json::array();
  for (int l = 0; l < model.num_layers(); ++l) {
    const auto w = model.weight(l);
    json rows = json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j) row[static_cast<std::size_t>(j)] = w(i, j);
      rows.push_back(row);
    }
    weights.push_back(std::move(rows));
    const auto b = model.bias(l);
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  json meta = {{"seed", model.meta.seed}, {"train_steps", model.meta.train_steps}};
  if (model.meta.contact_params) {
    const auto p = model.meta.contact_params->to_array();
    meta["contact_params"] = {{"mu1", p[0]}, {"mu2", p[1]}, {"e1", p[2]}, {"e2", p[3]}};
  }
  json doc = {{"layer_dims", model.layer_dims()},
              {"weights", std::move(weights)},
              {"biases", std::move(biases)},
              {"input_norm", scaler_json(model.input_norm)},
              {"output_norm", scaler_json(model.output_norm)},
              {"per_speed_output", model.per_speed_output},
              {"log_damping_inputs", model.log_damping_inputs},
              {"meta", std::move(meta)}};
  return doc.dump() + "\n";
}

Mlp checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    const auto dims = doc.at("layer_dims").get<std::vector<int>>();
    if (dims.size() < 2 || dims.front() != kInputDim || dims.back() != kOutputDim) {
      fail(ErrorCode::kShapeMismatch, "checkpoint layer_dims must run from 7 to 3");
    }
    Mlp model(dims);
    const json& weights = doc.at("weights");
    const json& biases = doc.at("biases");
    if (!weights.is_array() || !biases.is_array() ||
        weights.size() != static_cast<std::size_t>(model.num_layers()) ||
        biases.size() != static_cast<std::size_t>(model.num_layers())) {
      fail(ErrorCode::kShapeMismatch, "checkpoint layer count disagrees with layer_dims");
    }
    for (int l = 0; l < model.num_layers(); ++l) {
      auto w = model.weight(l);
      const json& rows = weights[static_cast<std::size_t>(l)];
      if (!rows.is_array() || rows.size() != static_cast<std::size_t>(w.rows())) {
        fail(ErrorCode::kShapeMismatch, "checkpoint weight rows disagree with layer_dims");
      }
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const auto row = rows[static_cast<std::size_t>(i)].get<std::vector<double>>();
        if (row.size() != static_cast<std::size_t>(w.cols())) {
          fail(ErrorCode::kShapeMismatch, "checkpoint weight columns disagree with layer_dims");
        }
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = row[static_cast<std::size_t>(j)];
      }
      const auto b = biases[static_cast<std::size_t>(l)].get<std::vector<double>>();
      if (b.size() != static_cast<std::size_t>(model.bias(l).size())) {
        fail(ErrorCode::kShapeMismatch, "checkpoint bias length disagrees with layer_dims");
      }
      model.bias(l) = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
    if (!model.params().allFinite()) fail(ErrorCode::kNumeric, "checkpoint holds non-finite weights");
    model.input_norm = scaler_from(doc.at("input_norm"), dims.front(), "input_norm");
    model.output_norm = scaler_from(doc.at("output_norm"), dims.back(), "output_norm");
    model.per_speed_output = doc.value("per_speed_output", false);
    model.log_damping_inputs = doc.value("log_damping_inputs", false);
    const json& meta = doc.at("meta");
    model.meta.seed = meta.at("seed").get<std::uint64_t>();
    model.meta.train_steps = meta.at("train_steps").get<long>();
    if (meta.contains("contact_params")) {
      const json& p = meta["contact_params"];
      model.meta.contact_params = ContactParams{p.at("mu1").get<double>(), p.at("mu2").get<double>(),
                                                p.at("e1").get<double>(), p.at("e2").get<double>()};
    }
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Mlp& model, const std::string& path) {
  write_text_file(path, checkpoint_to_json(model));
}

Mlp load_checkpoint(const std::string& path) { return checkpoint_from_json(read_text_file(path)); }

}  // namespace impactlab
