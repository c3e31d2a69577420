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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace hublab::web {

/// Input sequence, one column per time step.
using Sequence = Eigen::MatrixXd;

/// Gate rows are stacked input, forget, cell, output; columns are [x; h].
struct LstmCell {
  Eigen::MatrixXd w;  // 4H x (I + H)
  Eigen::VectorXd b;  // 4H
};

/// One bidirectional LSTM layer; the final forward and backward hidden
/// states are concatenated into a softmax layer.
struct BiLstmModel {
  int input = 1;
  int hidden = 0;
  int classes = 0;
  int seq_len = 0;  // 0 accepts any length
  LstmCell fwd, bwd;
  Eigen::MatrixXd out_w;  // C x 2H
  Eigen::VectorXd out_b;  // C

  /// Throws DomainError on inconsistent shapes or non-finite values.
  void validate() const;
  std::size_t parameter_count() const;
  /// Flat views, parameter groups in declaration order.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& flat);
};

/// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1.
BiLstmModel init_bilstm(int input, int hidden, int classes, int seq_len, std::uint64_t seed);
/// All-zero parameters.
BiLstmModel zero_bilstm(int input, int hidden, int classes, int seq_len);

/// Cross-entropy loss for one sample; adds d(loss)/d(params) into grad
/// (layout of BiLstmModel::flatten()) when non-null.
double loss_and_gradient(const BiLstmModel& m, const Sequence& x, int label, Eigen::VectorXd* grad);

/// Class probabilities (sum to 1). Throws DomainError on shape mismatch.
std::vector<double> predict(const BiLstmModel& m, const Sequence& x);

/// Largest relative difference between the analytic gradient and central
/// differences over every parameter: |a - n| / max(|a| + |n|, 1e-12). The
/// differences are taken in long double.
double grad_check(const BiLstmModel& m, const Sequence& x, int label, double epsilon = 1e-5);

enum class Optimizer { sgd, adam };

struct TrainConfig {
  int hidden = 64;
  int epochs = 30;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  double clip_norm = 5.0;
  Optimizer optimizer = Optimizer::sgd;
  std::uint64_t seed = 1;
};

struct TrainSample {
  Sequence x;
  int label = 0;
};

struct TrainResult {
  BiLstmModel model;
  std::vector<double> loss_curve;  // mean sample loss seen during each epoch
};

/// Mini-batch gradient descent with global-norm clipping. Sample order per
/// epoch comes from `seed`; equal inputs give identical parameters.
/// Throws DomainError for fewer than 2 classes or ragged lengths, and
/// TrainingError (with the epoch) when the loss turns non-finite.
TrainResult train_bilstm(const std::vector<TrainSample>& data, int classes, const TrainConfig& cfg);

Optimizer parse_optimizer(const std::string& name);  // throws ConfigError
std::string to_string(Optimizer o);

void to_json(nlohmann::json& j, const BiLstmModel& m);
void from_json(const nlohmann::json& j, BiLstmModel& m);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace hublab::web
