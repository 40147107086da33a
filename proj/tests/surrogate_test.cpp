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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace impactlab {
namespace {

using testing_util::random_input;
using testing_util::randomized_model;

double sq_loss(const Mlp& m, const SurrogateInput& in, const PostImpact& y) {
  return (forward(m, in.to_vector()) - to_vector(y)).squaredNorm();
}

// Relative error with an absolute floor at the central-difference round-off
// level, about 1e-16 * loss / h.
double rel_err(double a, double b, double loss) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-5 * std::max(1.0, loss)});
}

TEST(Surrogate, ZeroNetworkReturnsDenormalizedBias) {
  Mlp m;
  m.output_norm.mean = Eigen::Vector3d(0.1, -0.2, 0.3);
  m.output_norm.scale = Eigen::Vector3d(2.0, 3.0, 4.0);
  m.bias(m.num_layers() - 1) = Eigen::Vector3d(1.0, 1.0, -1.0);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5; ++i) {
    const PostImpact p = forward(m, random_input(rng));
    EXPECT_DOUBLE_EQ(p.vn, 2.1);
    EXPECT_DOUBLE_EQ(p.vt, 2.8);
    EXPECT_DOUBLE_EQ(p.omega, -3.7);
  }
}

TEST(Surrogate, InitIsSeeded) {
  EXPECT_EQ(init_model(7).params(), init_model(7).params());
  EXPECT_NE(init_model(7).params(), init_model(8).params());
  const Mlp m = init_model(11);
  const SurrogateInput in{{0.5, 1.0, 0.1}, {0.3, 0.3, 0.5, 0.5}};
  const PostImpact a = forward(m, in);
  const PostImpact b = forward(m, in);
  EXPECT_EQ(a, b);
  for (int l = 0; l < m.num_layers(); ++l) EXPECT_TRUE((m.bias(l).array() == 0.0).all());
}

TEST(Surrogate, HeInitKeepsPreActivationVariance) {
  const Mlp m = init_model(5);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  const int samples = 10000;
  Eigen::MatrixXd z(kInputDim, samples);
  for (int j = 0; j < samples; ++j)
    for (int i = 0; i < kInputDim; ++i) z(i, j) = n01(rng);
  const Eigen::MatrixXd h1 = m.weight(0) * z;
  const Eigen::MatrixXd h2 = m.weight(1) * h1.cwiseMax(0.0);
  const double in_var = z.array().square().mean();
  for (const Eigen::MatrixXd* h : {&h1, &h2}) {
    const double mean = h->mean();
    const double var = (h->array() - mean).square().mean();
    EXPECT_GT(var, in_var / 3.0);
    EXPECT_LT(var, in_var * 3.0);
  }
}

TEST(Surrogate, BackwardWeightsMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 4; ++trial) {
    Mlp m = randomized_model(rng, trial % 2 == 1);
    const SurrogateInput in = random_input(rng);
    const PostImpact y{0.4, -0.1, 2.0};
    const Eigen::VectorXd g = backward_weights(m, in, y);
    ASSERT_EQ(g.size(), m.num_params());
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < m.num_params(); ++k) {
      const double w = m.params()(k);
      m.params()(k) = w + h;
      const double up = sq_loss(m, in, y);
      m.params()(k) = w - h;
      const double dn = sq_loss(m, in, y);
      m.params()(k) = w;
      worst = std::max(worst, rel_err(g(k), (up - dn) / (2 * h), sq_loss(m, in, y)));
    }
    EXPECT_LT(worst, 1e-4) << "trial " << trial;
  }
}

TEST(Surrogate, BackwardParamsMatchesFiniteDifferences) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Mlp m = randomized_model(rng, trial % 2 == 1);
    const SurrogateInput in = random_input(rng);
    const PostImpact y{0.3, 0.05, -1.0};
    const auto g = backward_params(m, in, y);
    for (int k = 0; k < 4; ++k) {
      const double h = 1e-5;
      auto p = in.params.to_array();
      SurrogateInput up = in, dn = in;
      p[k] += h;
      up.params = ContactParams::from_array(p);
      p[k] -= 2 * h;
      dn.params = ContactParams::from_array(p);
      const double fd = (sq_loss(m, up, y) - sq_loss(m, dn, y)) / (2 * h);
      EXPECT_LT(rel_err(g[k], fd, sq_loss(m, in, y)), 1e-4) << "trial " << trial << " param " << k;
    }
  }
}

TEST(Surrogate, InputGradientMatchesFiniteDifferencesWithFeatureMaps) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Mlp m = randomized_model(rng, true);
    const InputVec x = random_input(rng).to_vector();
    const Eigen::MatrixXd y = Eigen::Vector3d(0.3, 0.05, -1.0);
    const OutputVec w(1.0, 0.5, 2.0);
    const Eigen::VectorXd sw = Eigen::VectorXd::Constant(1, 3.0);
    const LossGrad g = loss_and_grad(m, x, y, w, false, true, &sw);
    auto loss = [&](const InputVec& at) { return loss_and_grad(m, at, y, w, false, false, &sw).loss; };
    for (int k = 0; k < kInputDim; ++k) {
      const double h = 1e-6;
      InputVec up = x, dn = x;
      up(k) += h;
      dn(k) -= h;
      const double fd = (loss(up) - loss(dn)) / (2 * h);
      EXPECT_LT(rel_err(g.d_inputs(k, 0), fd, g.loss), 1e-4) << "trial " << trial << " input " << k;
    }
  }
}

TEST(Surrogate, PerSpeedOutputScalesWithSpeed) {
  std::mt19937_64 rng(24);
  Mlp m = randomized_model(rng, true);
  SurrogateInput in = random_input(rng);
  const PostImpact a = forward(m, in);
  m.per_speed_output = false;
  const PostImpact b = forward(m, in);
  EXPECT_NEAR(a.vn, in.spec.speed * b.vn, 1e-12);
  EXPECT_NEAR(a.vt, in.spec.speed * b.vt, 1e-12);
  EXPECT_NEAR(a.omega, in.spec.speed * b.omega, 1e-12);
}

TEST(Surrogate, GradientsVanishAtTarget) {
  std::mt19937_64 rng(4);
  const Mlp m = randomized_model(rng);
  const SurrogateInput in = random_input(rng);
  const PostImpact y = forward(m, in);
  EXPECT_TRUE((backward_weights(m, in, y).array() == 0.0).all());
  for (double g : backward_params(m, in, y)) EXPECT_EQ(g, 0.0);
  for (double g : backward_params(Mlp(), in, {1.0, 2.0, 3.0})) EXPECT_EQ(g, 0.0);
}

TEST(Surrogate, ScaledLossScalesGradient) {
  std::mt19937_64 rng(5);
  const Mlp m = randomized_model(rng);
  const SurrogateInput in = random_input(rng);
  const Eigen::MatrixXd x = in.to_vector();
  const Eigen::MatrixXd y = Eigen::Vector3d(0.2, 0.1, 0.0);
  const LossGrad a = loss_and_grad(m, x, y, OutputVec::Ones(), true, true);
  const LossGrad b = loss_and_grad(m, x, y, OutputVec::Constant(2.0), true, true);
  EXPECT_EQ(b.loss, 2.0 * a.loss);
  EXPECT_TRUE((b.d_params.array() == 2.0 * a.d_params.array()).all());
  EXPECT_TRUE((b.d_inputs.array() == 2.0 * a.d_inputs.array()).all());
}

TEST(Surrogate, ParamGradientIgnoresSpecNormalization) {
  std::mt19937_64 rng(6);
  const Mlp m = randomized_model(rng);
  const SurrogateInput in = random_input(rng);
  const PostImpact y{0.5, 0.0, 1.0};
  // Re-express the spec slice under different constants so the network sees
  // identical normalized inputs.
  Mlp m2 = m;
  SurrogateInput in2 = in;
  const Eigen::Vector3d new_mean(0.3, -0.7, 0.05), new_scale(0.4, 2.5, 0.125);
  InputVec x = in.to_vector();
  for (int i = 0; i < 3; ++i) {
    const double z = (x(i) - m.input_norm.mean(i)) / m.input_norm.scale(i);
    m2.input_norm.mean(i) = new_mean(i);
    m2.input_norm.scale(i) = new_scale(i);
    x(i) = new_mean(i) + z * new_scale(i);
  }
  in2.spec = {x(0), x(1), x(2)};
  const auto a = backward_params(m, in, y);
  const auto b = backward_params(m2, in2, y);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[k], 1e-12 * std::max(1.0, std::abs(a[k])));
}

TEST(Surrogate, PiecewiseLinearBetweenKinks) {
  std::mt19937_64 rng(8);
  const Mlp m = randomized_model(rng);
  const InputVec x = random_input(rng).to_vector();
  // Jacobian column j from the input gradient of each output component.
  Eigen::Matrix<double, kOutputDim, kInputDim> jac;
  for (int k = 0; k < kOutputDim; ++k) {
    OutputVec w = OutputVec::Zero();
    w(k) = 1.0;
    // d/dx of (f_k - y_k)^2 at y_k = f_k - 0.5 is f_k'(x).
    OutputVec y = forward(m, x);
    y(k) -= 0.5;
    const LossGrad g = loss_and_grad(m, x, y, w, false, true);
    jac.row(k) = g.d_inputs.col(0).transpose();
  }
  InputVec delta;
  delta << 1e-7, -2e-7, 1e-7, 3e-8, -1e-7, 2e-7, 1e-7;
  const OutputVec diff = forward(m, InputVec(x + delta)) - forward(m, x);
  EXPECT_LT((diff - jac * delta).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Surrogate, ScalerRoundTrip) {
  Eigen::MatrixXd data(3, 50);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    for (Eigen::Index i = 0; i < 3; ++i) data(i, j) = u(rng) * (i + 1);
  data.row(2).setConstant(4.0);
  const Scaler s = Scaler::fit(data);
  EXPECT_TRUE(s.valid(3));
  EXPECT_EQ(s.scale(2), 1.0);
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const Eigen::VectorXd y = data.col(j);
    EXPECT_LT((s.denormalize(s.normalize(y)) - y).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(AdamW, FirstStepExample) {
  OptimState st(1, AdamWConfig{});
  Eigen::VectorXd w(1), g(1);
  w << 1.0;
  g << 0.5;
  adamw_step(st, w, g);
  // 0.99899 up to the eps term in the denominator.
  EXPECT_NEAR(w(0), 0.99899, 1e-10);
  EXPECT_EQ(st.step, 1);
}

TEST(AdamW, ZeroGradient) {
  Eigen::VectorXd w(1), g = Eigen::VectorXd::Zero(1);
  w << 1.0;
  OptimState no_decay(1, AdamWConfig{1e-3, 0.0});
  adamw_step(no_decay, w, g);
  EXPECT_EQ(w(0), 1.0);
  OptimState decay(1, AdamWConfig{1e-3, 1e-2});
  adamw_step(decay, w, g);
  EXPECT_NEAR(w(0), 0.99999, 1e-15);
}

TEST(AdamW, ShapeMismatch) {
  OptimState st(3, AdamWConfig{});
  Eigen::VectorXd w = Eigen::VectorXd::Zero(3), g = Eigen::VectorXd::Zero(2);
  try {
    adamw_step(st, w, g);
    FAIL() << "expected ShapeMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(AdamW, SmallStepDecreasesSampleLoss) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    Mlp m = randomized_model(rng);
    const SurrogateInput in = random_input(rng);
    const PostImpact y{0.2, 0.1, -0.5};
    const double before = sq_loss(m, in, y);
    OptimState st(m.num_params(), AdamWConfig{1e-5, 1e-2});
    adamw_step(st, m.params(), backward_weights(m, in, y));
    EXPECT_LT(sq_loss(m, in, y), before);
  }
}

TEST(Checkpoint, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  Mlp m = randomized_model(rng);
  m.meta = {99, 1234, ContactParams{0.3, 0.25, 0.35, 0.6}};
  const Mlp back = checkpoint_from_json(checkpoint_to_json(m));
  EXPECT_EQ(back.params(), m.params());
  EXPECT_EQ(back.input_norm.mean, m.input_norm.mean);
  EXPECT_EQ(back.output_norm.scale, m.output_norm.scale);
  EXPECT_EQ(back.meta.seed, 99u);
  EXPECT_EQ(back.meta.train_steps, 1234);
  ASSERT_TRUE(back.meta.contact_params.has_value());
  EXPECT_EQ(*back.meta.contact_params, *m.meta.contact_params);
  EXPECT_EQ(checkpoint_to_json(back), checkpoint_to_json(m));
  Mlp mapped = randomized_model(rng, true);
  const Mlp mapped_back = checkpoint_from_json(checkpoint_to_json(mapped));
  EXPECT_TRUE(mapped_back.per_speed_output);
  EXPECT_TRUE(mapped_back.log_damping_inputs);
}

TEST(Checkpoint, RejectsInconsistentDims) {
  std::string doc = checkpoint_to_json(init_model(1));
  const auto pos = doc.find("[7,128,128,3]");
  ASSERT_NE(pos, std::string::npos);
  doc.replace(pos, 13, "[7,128,127,3]");
  try {
    checkpoint_from_json(doc);
    FAIL() << "expected ShapeMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  try {
    checkpoint_from_json("{not json");
    FAIL() << "expected Config";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

}  // namespace
}  // namespace impactlab
