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

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"
#include "hublab/web/cv.hpp"

using namespace hublab;
using namespace hublab::web;

namespace {

FeatureSequence seq(std::vector<double> v, std::string label) {
  FeatureSequence f;
  f.values = std::move(v);
  f.label = std::move(label);
  return f;
}

// Label "hi" has a late step, "lo" an early one.
LabeledDataset toy(std::size_t per_label, bool reversed = false) {
  LabeledDataset d(DatasetShape{16, 2});
  Rng rng(3);
  std::vector<std::pair<FeatureSequence, std::string>> items;
  for (std::size_t k = 0; k < per_label; ++k) {
    for (const std::string label : {"hi", "lo"}) {
      std::vector<double> v(16, 1.0);
      for (std::size_t i = 0; i < 16; ++i) {
        v[i] += 0.05 * rng.uniform01();
        if ((label == "hi") == (i >= 8)) v[i] += 3.0;
      }
      items.push_back({seq(v, label), label + std::to_string(k)});
    }
  }
  if (reversed) std::reverse(items.begin(), items.end());
  for (auto& [f, id] : items) d.add(f, id);
  return d;
}

}  // namespace

TEST(Dataset, TruncatePoolPad) {
  LabeledDataset d(DatasetShape{6, 2});
  d.add(seq({1, 3, 5, 7, 9, 11, 13}, "a"), "x");
  d.add(seq({2, 4}, "b"), "y");
  EXPECT_EQ(d.items()[0].values, (std::vector<double>{2, 6, 10}));
  EXPECT_EQ(d.items()[1].values, (std::vector<double>{3, kPadValue, kPadValue}));
  EXPECT_EQ(d.labels(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.counts().at("a"), 1u);
  EXPECT_THROW(d.add(FeatureSequence{}, "z"), DomainError);
}

TEST(Dataset, NormalizerIgnoresPadding) {
  DatasetItem a{{1, 3, kPadValue}, "a", "1"};
  const auto z = Normalizer::fit({&a});
  EXPECT_DOUBLE_EQ(z.mean, 2.0);
  EXPECT_DOUBLE_EQ(z.stddev, 1.0);
  EXPECT_EQ(z.apply(a.values), (std::vector<double>{-1, 1, 0}));
}

TEST(Folds, StratifiedDisjointCovering) {
  const auto d = toy(30);
  const auto f = assign_folds(d, 5, 9);
  ASSERT_EQ(f.size(), d.size());
  std::map<std::pair<std::string, std::size_t>, int> per;
  for (std::size_t i = 0; i < f.size(); ++i) {
    ASSERT_LT(f[i], 5u);
    ++per[{d.items()[i].label, f[i]}];
  }
  for (const auto& [key, n] : per) EXPECT_EQ(n, 6) << key.first << " fold " << key.second;
  EXPECT_THROW(assign_folds(toy(3), 5, 1), DomainError);
  EXPECT_THROW(assign_folds(toy(3), 1, 1), DomainError);
}

TEST(Folds, IndependentOfInsertionOrder) {
  const auto a = toy(10);
  const auto b = toy(10, true);
  const auto fa = assign_folds(a, 5, 4);
  const auto fb = assign_folds(b, 5, 4);
  std::map<std::string, std::size_t> ma, mb;
  for (std::size_t i = 0; i < a.size(); ++i) ma[a.items()[i].id] = fa[i];
  for (std::size_t i = 0; i < b.size(); ++i) mb[b.items()[i].id] = fb[i];
  EXPECT_EQ(ma, mb);
}

TEST(TopK, OrderAndTies) {
  EXPECT_EQ(top_k({0.1, 0.5, 0.2, 0.2}, 3), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(top_k({0.6, 0.4}, 3).size(), 2u);
}

TEST(CrossValidate, SeparableToyIsPerfectAndOrderInvariant) {
  CvConfig cfg;
  cfg.train.hidden = 4;
  cfg.train.epochs = 40;
  cfg.train.batch_size = 4;
  cfg.train.learning_rate = 0.2;
  const auto r = cross_validate(toy(10), cfg);
  EXPECT_DOUBLE_EQ(r.top1, 1.0);
  for (const auto& f : r.folds) {
    EXPECT_DOUBLE_EQ(f.top1, 1.0);
    EXPECT_GE(f.top3, f.top1);
  }
  std::set<std::string> seen;
  for (const auto& f : r.folds) {
    for (const auto& id : f.test_ids) EXPECT_TRUE(seen.insert(id).second);
  }
  EXPECT_EQ(seen.size(), 20u);

  const auto r2 = cross_validate(toy(10, true), cfg);
  EXPECT_EQ(nlohmann::json(r2).dump(), nlohmann::json(r).dump());
  cfg.workers = 3;
  EXPECT_EQ(nlohmann::json(cross_validate(toy(10), cfg)).dump(), nlohmann::json(r).dump());
  EXPECT_NE(format_cv_report(r).find("all"), std::string::npos);
}

TEST(CrossValidate, NeedsTwoLabels) {
  LabeledDataset d(DatasetShape{4, 1});
  for (int i = 0; i < 10; ++i) d.add(seq({1, 2, 3, 4}, "only"), std::to_string(i));
  EXPECT_THROW(cross_validate(d, {}), DomainError);
}
