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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hublab/web/bilstm.hpp"
#include "hublab/web/dataset.hpp"

namespace hublab::web {

struct CvConfig {
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  TrainConfig train;
  /// Folds trained concurrently; results merge by fold index.
  std::size_t workers = 1;
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::string> test_ids;
  double top1 = 0.0;
  double top3 = 0.0;
  double final_train_loss = 0.0;
  /// Model trained on the other folds and the z-score statistics it expects.
  BiLstmModel model;
  Normalizer normalizer;
};

struct CvReport {
  std::vector<std::string> labels;
  std::vector<FoldResult> folds;
  /// Over all held-out predictions.
  double top1 = 0.0;
  double top3 = 0.0;
  /// confusion[truth][predicted] counts, label order as `labels`.
  std::vector<std::vector<std::size_t>> confusion;
};

/// Stratified fold assignment: per label, items sorted by id then shuffled
/// with a seed derived from (seed, label index). Returns the fold of each
/// dataset item. Throws DomainError when a label has fewer than k items.
std::vector<std::size_t> assign_folds(const LabeledDataset& data, std::size_t k, std::uint64_t seed);

/// Train on k-1 folds (z-scored with their statistics), evaluate the held-out
/// fold. Throws DomainError for k < 2, fewer than 2 labels, or too few items.
CvReport cross_validate(const LabeledDataset& data, const CvConfig& cfg);

/// Indices of the k largest probabilities, best first.
std::vector<std::size_t> top_k(const std::vector<double>& probs, std::size_t k);

std::string format_cv_report(const CvReport& r);
void to_json(nlohmann::json& j, const CvReport& r);

}  // namespace hublab::web
