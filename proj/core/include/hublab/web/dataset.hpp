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

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "hublab/web/features.hpp"

namespace hublab::web {

/// Value used for windows past the end of a shorter trace. Delays are
/// positive, so it never collides with a real feature.
inline constexpr double kPadValue = -1.0;

struct DatasetItem {
  std::vector<double> values;  // standardized length, may contain kPadValue
  std::string label;
  /// Stable identity (trace stem, seed). Fold assignment sorts on (label, id)
  /// so it does not depend on the order items were added.
  std::string id;
};

struct DatasetShape {
  std::size_t length = 1600;  // windows kept before pooling
  std::size_t pool = 4;       // mean-pool factor applied after truncation
  std::size_t pooled_length() const { return (length + pool - 1) / pool; }
};

class LabeledDataset {
 public:
  explicit LabeledDataset(DatasetShape shape = {});

  /// Truncates to shape.length, pools, then pads with kPadValue.
  /// Throws DomainError when the sequence has no label.
  void add(const FeatureSequence& seq, std::string id);

  const DatasetShape& shape() const { return shape_; }
  const std::vector<DatasetItem>& items() const { return items_; }
  /// Sorted label set.
  std::vector<std::string> labels() const;
  std::map<std::string, std::size_t> counts() const;
  std::size_t size() const { return items_.size(); }

 private:
  DatasetShape shape_;
  std::vector<DatasetItem> items_;
};

/// z-score statistics over the non-padding values of a set of items.
struct Normalizer {
  double mean = 0.0;
  double stddev = 1.0;

  static Normalizer fit(const std::vector<const DatasetItem*>& items);
  /// Padding maps to 0.
  std::vector<double> apply(const std::vector<double>& values) const;
};

}  // namespace hublab::web
