/*
 * Copyright 2026 The hublab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"
#include "hublab/web/bilstm.hpp"

using namespace hublab;
using namespace hublab::web;

namespace {

Sequence random_sequence(Rng& rng, int in, int len) {
  Sequence x(in, len);
  for (int j = 0; j < len; ++j) {
    for (int i = 0; i < in; ++i) x(i, j) = rng.normal();
  }
  return x;
}

// Class 0: rising ramp, class 1: falling ramp, both with noise.
std::vector<TrainSample> ramps(std::uint64_t seed, int per_class, int len) {
  Rng rng(seed);
  std::vector<TrainSample> out;
  for (int c = 0; c < 2; ++c) {
    for (int k = 0; k < per_class; ++k) {
      Sequence x(1, len);
      for (int t = 0; t < len; ++t) {
        const double ramp = (static_cast<double>(t) / (len - 1)) * 2.0 - 1.0;
        x(0, t) = (c == 0 ? ramp : -ramp) + 0.2 * rng.normal();
      }
      out.push_back({x, c});
    }
  }
  return out;
}

}  // namespace

TEST(BiLstm, GradCheckRandomModels) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int hidden = static_cast<int>(rng.between(1, 16));
    const int len = static_cast<int>(rng.between(1, 20));
    const int in = static_cast<int>(rng.between(1, 3));
    const int classes = static_cast<int>(rng.between(2, 5));
    const auto m = init_bilstm(in, hidden, classes, len, seed);
    const auto x = random_sequence(rng, in, len);
    const double err = grad_check(m, x, static_cast<int>(rng.below(classes)), 1e-5);
    EXPECT_LT(err, 1e-4) << "seed " << seed << " H=" << hidden << " T=" << len;
  }
}

TEST(BiLstm, ZeroModelBiasGradients) {
  const auto m = zero_bilstm(1, 4, 3, 5);
  const Sequence x = Sequence::Zero(1, 5);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.parameter_count()));
  loss_and_gradient(m, x, 1, &g);
  // Output bias gradient is p - onehot = (1/3, -2/3, 1/3).
  const auto n = g.size();
  EXPECT_NEAR(g(n - 3), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(g(n - 2), -2.0 / 3.0, 1e-12);
  EXPECT_NEAR(g(n - 1), 1.0 / 3.0, 1e-12);
  EXPECT_LT(grad_check(m, x, 1, 1e-5), 1e-6);
}

TEST(BiLstm, SingleStepIsFeedforward) {
  Rng rng(8);
  const auto m = init_bilstm(2, 3, 2, 1, 8);
  const auto x = random_sequence(rng, 2, 1);
  // Forward and backward cells see the same single input from zero state.
  auto cell_h = [&](const LstmCell& c) {
    Eigen::VectorXd z(5);
    z << x(0, 0), x(1, 0), 0, 0, 0;
    const Eigen::VectorXd a = c.w * z + c.b;
    Eigen::VectorXd h(3);
    for (int k = 0; k < 3; ++k) {
      const double i = 1 / (1 + std::exp(-a(k)));
      const double g = std::tanh(a(6 + k));
      const double o = 1 / (1 + std::exp(-a(9 + k)));
      h(k) = o * std::tanh(i * g);
    }
    return h;
  };
  Eigen::VectorXd feat(6);
  feat << cell_h(m.fwd), cell_h(m.bwd);
  Eigen::VectorXd logits = m.out_w * feat + m.out_b;
  const double p0 = 1 / (1 + std::exp(logits(1) - logits(0)));
  EXPECT_NEAR(predict(m, x)[0], p0, 1e-12);
  EXPECT_LT(grad_check(m, x, 0), 1e-4);
}

TEST(BiLstm, ZeroModelUniformAndLnC) {
  const auto m = zero_bilstm(1, 8, 5, 10);
  Rng rng(1);
  const auto x = random_sequence(rng, 1, 10);
  for (double p : predict(m, x)) EXPECT_NEAR(p, 0.2, 1e-12);
  EXPECT_NEAR(loss_and_gradient(m, x, 3, nullptr), std::log(5.0), 1e-12);
}

TEST(BiLstm, ProbabilitiesSumToOne) {
  Rng rng(2);
  const auto m = init_bilstm(1, 6, 7, 12, 2);
  for (int k = 0; k < 20; ++k) {
    const auto p = predict(m, random_sequence(rng, 1, 12));
    double s = 0;
    for (double v : p) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(BiLstm, ShapeMismatchRejected) {
  const auto m = init_bilstm(1, 4, 2, 10, 1);
  EXPECT_THROW(predict(m, Sequence::Zero(1, 9)), DomainError);
  EXPECT_THROW(predict(m, Sequence::Zero(2, 10)), DomainError);
}

TEST(BiLstm, LearnsSeparableToy) {
  const auto data = ramps(4, 10, 12);
  TrainConfig cfg;
  cfg.hidden = 6;
  cfg.epochs = 200;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.1;
  const auto res = train_bilstm(data, 2, cfg);
  EXPECT_LT(res.loss_curve.back(), res.loss_curve.front());
  int correct = 0;
  for (const auto& s : data) {
    const auto p = predict(res.model, s.x);
    correct += (p[1] > p[0]) == (s.label == 1);
  }
  EXPECT_EQ(correct, static_cast<int>(data.size()));
}

TEST(BiLstm, DeterministicPerSeed) {
  const auto data = ramps(5, 4, 8);
  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 5;
  for (auto opt : {Optimizer::sgd, Optimizer::adam}) {
    cfg.optimizer = opt;
    const auto a = train_bilstm(data, 2, cfg);
    const auto b = train_bilstm(data, 2, cfg);
    EXPECT_EQ(a.model.flatten(), b.model.flatten());
    EXPECT_EQ(a.loss_curve, b.loss_curve);
  }
  cfg.seed = 2;
  EXPECT_NE(train_bilstm(data, 2, cfg).model.flatten(), train_bilstm(data, 2, TrainConfig{}).model.flatten());
}

TEST(BiLstm, DivergenceRaisesTrainingError) {
  const auto data = ramps(6, 4, 8);
  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 10;
  cfg.learning_rate = 1e308;
  cfg.clip_norm = 0;
  try {
    train_bilstm(data, 2, cfg);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_GE(e.epoch(), 0);
  }
}

TEST(BiLstm, TrainingPreconditions) {
  EXPECT_THROW(train_bilstm(ramps(1, 2, 5), 1, {}), DomainError);
  auto ragged = ramps(1, 2, 5);
  ragged[0].x = Sequence::Zero(1, 4);
  EXPECT_THROW(train_bilstm(ragged, 2, {}), DomainError);
}

TEST(BiLstm, JsonRoundTrip) {
  const auto m = init_bilstm(2, 3, 4, 6, 9);
  const nlohmann::json j = m;
  const auto back = j.get<BiLstmModel>();
  EXPECT_EQ(back.flatten(), m.flatten());
  EXPECT_EQ(back.seq_len, 6);
  TrainConfig c;
  c.optimizer = Optimizer::adam;
  c.hidden = 24;
  const auto cj = nlohmann::json(c).get<TrainConfig>();
  EXPECT_EQ(cj.optimizer, Optimizer::adam);
  EXPECT_EQ(cj.hidden, 24);
  EXPECT_THROW(nlohmann::json({{"optimizer", "rmsprop"}}).get<TrainConfig>(), ConfigError);
}
