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

#include "hublab/web/dataset.hpp"

#include <cmath>
#include <set>

#include "hublab/common/error.hpp"

namespace hublab::web {

LabeledDataset::LabeledDataset(DatasetShape shape) : shape_(shape) {
  if (shape_.length == 0 || shape_.pool == 0) throw DomainError("dataset length and pool must be >= 1");
}

void LabeledDataset::add(const FeatureSequence& seq, std::string id) {
  if (!seq.label || seq.label->empty()) throw DomainError("dataset item '" + id + "' has no label");
  std::vector<double> raw(seq.values.begin(),
                          seq.values.begin() + static_cast<std::ptrdiff_t>(std::min(seq.values.size(), shape_.length)));
  std::vector<double> pooled = mean_pool(raw, shape_.pool);
  pooled.resize(shape_.pooled_length(), kPadValue);
  items_.push_back({std::move(pooled), *seq.label, std::move(id)});
}

std::vector<std::string> LabeledDataset::labels() const {
  std::set<std::string> s;
  for (const auto& it : items_) s.insert(it.label);
  return {s.begin(), s.end()};
}

std::map<std::string, std::size_t> LabeledDataset::counts() const {
  std::map<std::string, std::size_t> c;
  for (const auto& it : items_) ++c[it.label];
  return c;
}

Normalizer Normalizer::fit(const std::vector<const DatasetItem*>& items) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto* it : items) {
    for (double v : it->values) {
      if (v == kPadValue) continue;
      sum += v;
      sq += v * v;
      ++n;
    }
  }
  Normalizer z;
  if (n == 0) return z;
  z.mean = sum / static_cast<double>(n);
  const double var = sq / static_cast<double>(n) - z.mean * z.mean;
  z.stddev = var > 1e-24 ? std::sqrt(var) : 1.0;
  return z;
}

std::vector<double> Normalizer::apply(const std::vector<double>& values) const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] == kPadValue ? 0.0 : (values[i] - mean) / stddev;
  }
  return out;
}

}  // namespace hublab::web
