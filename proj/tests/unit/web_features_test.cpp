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

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"
#include "hublab/scenarios/web_traffic.hpp"
#include "hublab/sim/simulator.hpp"
#include "hublab/web/features.hpp"

using namespace hublab;
using namespace hublab::web;

TEST(Featurize, WindowMaximum) {
  sim::SpyTrace t;
  t.records = {{0, 1000}, {2000, 5000}, {6000, 2000}};
  const auto f = featurize(t, 5.0);
  EXPECT_EQ(f.values, (std::vector<double>{5.0, 2.0}));
}

TEST(Featurize, UniformDelaysConstant) {
  sim::SpyTrace t;
  for (int i = 1; i <= 100; ++i) t.records.push_back({i * 1000, 1000});
  const auto f = featurize(t);
  for (double v : f.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Featurize, EightSecondTraceHas1600Windows) {
  const auto w = sim::web_workload({}, sim::NoiseModel{}, sim::ClosedLoopReader{});
  const auto b = sim::run_simulation({}, w, 8'000'000, 1);
  EXPECT_EQ(featurize(b.spy).values.size(), 1600u);
}

TEST(Featurize, EmptyWindowsCarryMedianAndOrderInsensitive) {
  sim::SpyTrace t;
  t.records = {{1000, 1000}, {2000, 1000}, {3000, 1000}, {21000, 18000}};
  t.meta.duration_us = 25000;
  const auto f = featurize(t);
  ASSERT_EQ(f.values.size(), 5u);
  EXPECT_DOUBLE_EQ(f.values[1], 1.0);  // no record in [5, 10) ms
  EXPECT_DOUBLE_EQ(f.values[4], 18.0);

  auto shuffled = t;
  std::swap(shuffled.records[0], shuffled.records[2]);
  EXPECT_EQ(featurize(shuffled).values, f.values);
  EXPECT_THROW(featurize(t, 0.0), DomainError);
  EXPECT_THROW(featurize(sim::SpyTrace{}), DomainError);
}

TEST(Pearson, Identities) {
  Rng rng(3);
  std::vector<double> x(200);
  for (auto& v : x) v = rng.normal();
  std::vector<double> neg, aff;
  for (double v : x) {
    neg.push_back(-v);
    aff.push_back(2 * v + 3);
  }
  EXPECT_NEAR(pearson(x, x).r, 1.0, 1e-12);
  EXPECT_NEAR(pearson(x, neg).r, -1.0, 1e-12);
  EXPECT_NEAR(pearson(x, aff).r, 1.0, 1e-12);
  EXPECT_NEAR(pearson(aff, x).r, 1.0, 1e-12);
}

TEST(Pearson, SymmetricAndAffineInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(64), y(64);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.normal();
      y[i] = 0.5 * x[i] + rng.normal();
    }
    const double r = pearson(x, y).r;
    EXPECT_NEAR(pearson(y, x).r, r, 1e-12);
    const double a = rng.uniform(0.1, 10), b = rng.uniform(-5, 5);
    std::vector<double> ya;
    for (double v : y) ya.push_back(a * v + b);
    EXPECT_NEAR(pearson(x, ya).r, r, 1e-9);
    EXPECT_LE(std::abs(r), 1.0);
  }
}

TEST(Pearson, UndefinedAndErrors) {
  EXPECT_FALSE(pearson({1, 1, 1}, {1, 2, 3}).defined);
  EXPECT_TRUE(pearson({1, 2, 3}, {1, 2, 4}).defined);
  EXPECT_THROW(pearson({1, 2}, {1}), DomainError);
  EXPECT_THROW(pearson({}, {}), DomainError);
}

TEST(BinTraffic, SumsPerWindow) {
  sim::TrafficTimeline t;
  t.points = {{0, 10}, {4999, 5}, {5000, 7}, {20000, 3}};
  EXPECT_EQ(bin_traffic(t, 5.0, 3), (std::vector<double>{15, 7, 0}));
}

TEST(MeanPool, GroupsOfFactor) {
  EXPECT_EQ(mean_pool({1, 3, 5, 7, 9}, 2), (std::vector<double>{2, 6, 9}));
  EXPECT_EQ(mean_pool({1, 2}, 1), (std::vector<double>{1, 2}));
  EXPECT_THROW(mean_pool({1}, 0), DomainError);
}

TEST(DetectBursts, ThresholdInsideAnnotation) {
  FeatureSequence f;
  f.values = {1, 1, 3, 1, 1, 1, 1, 1.2, 1, 1};
  std::vector<scenarios::BurstAnnotation> ann = {{100, 0, 10'000, 15'000}, {100, 1, 35'000, 40'000}};
  const auto base = idle_baseline(f, ann);
  EXPECT_DOUBLE_EQ(base.baseline_ms, 1.0);
  const auto d = detect_bursts(f, ann, base.baseline_ms, 0.5);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].detected, 1);
  EXPECT_EQ(d[0].repeats, 2);
  EXPECT_DOUBLE_EQ(d[0].rate(), 0.5);
}

TEST(DetectBursts, TinyAndHugeBurstsUnderDefaults) {
  const auto sw = scenarios::burst_sweep_workload({16, 4 << 20}, 5, 1000.0, {}, 2);
  const auto w = sim::web_workload(sw.timeline, sim::NoiseModel{}, sim::ClosedLoopReader{});
  const auto b = sim::run_simulation({}, w, sw.duration_us, 2);
  const auto f = featurize(b.spy);
  const auto base = idle_baseline(f, sw.annotations);
  const auto d = detect_bursts(f, sw.annotations, base.baseline_ms, 3 * base.mad_ms);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].detected, 0);
  EXPECT_EQ(d[1].detected, 5);
}

TEST(NicAggregation, FlushBySizeAndDeadline) {
  sim::TrafficTimeline t;
  t.points = {{0, 10000}, {100, 10000}, {1000, 500}};
  const auto r = sim::aggregate_requests(t, {16384, 300});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].t_us, 100);
  EXPECT_EQ(r[0].bytes, 16384);
  EXPECT_EQ(r[1].t_us, 400);  // remainder flushed at its deadline
  EXPECT_EQ(r[1].bytes, 20000 - 16384);
  EXPECT_EQ(r[2].t_us, 1300);
  EXPECT_EQ(r[2].bytes, 500);
  std::int64_t total = 0;
  for (const auto& q : r) total += q.bytes;
  EXPECT_EQ(total, t.total_bytes());
  EXPECT_EQ(sim::aggregate_requests(t, {0, 300}).size(), 3u);
}
