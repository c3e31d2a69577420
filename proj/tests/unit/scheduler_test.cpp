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

#include <vector>

#include "hublab/common/rng.hpp"
#include "hublab/sim/scheduler.hpp"
#include "hublab/usb/bulk_limits.hpp"

using namespace hublab;
using namespace hublab::sim;
using usb::ArbitrationKind;
using usb::ArbitrationPolicy;

namespace {

constexpr DeviceId kMouse = 1;
constexpr DeviceId kKeyboard = 2;

InterruptTransaction mouse_poll(std::int64_t frame, std::uint64_t seq) {
  return {kMouse, InterruptRole::mouse, frame, seq};
}
InterruptTransaction key(std::int64_t frame, std::uint64_t seq) {
  return {kKeyboard, InterruptRole::keyboard, frame, seq};
}

usb::BulkLimits limits512() { return usb::bulk_limits(usb::PayloadSize(512)); }

}  // namespace

TEST(TtSchedule, UncontendedMouseServed) {
  Rng rng(1);
  std::vector<InterruptTransaction> pending{mouse_poll(0, 0)};
  const auto s = tt_schedule_frame(pending, {}, {1, {}}, rng);
  ASSERT_EQ(s.served.size(), 1u);
  EXPECT_EQ(s.served[0].device, kMouse);
  EXPECT_TRUE(s.deferred.empty());
}

TEST(TtSchedule, KeyboardBeforeMouseSameFrame) {
  Rng rng(1);
  // Mouse poll arrived first (lower seq) but the keyboard wins the tie.
  std::vector<InterruptTransaction> pending{mouse_poll(3, 0), key(3, 1)};
  const auto s = tt_schedule_frame(pending, {}, {1, {}}, rng);
  ASSERT_EQ(s.served.size(), 1u);
  EXPECT_EQ(s.served[0].device, kKeyboard);
  ASSERT_EQ(s.deferred.size(), 1u);
  EXPECT_EQ(s.deferred[0].device, kMouse);
}

TEST(TtSchedule, OlderDeferredBeatsNewKeyboard) {
  Rng rng(1);
  std::vector<InterruptTransaction> pending{key(4, 5), mouse_poll(3, 2)};
  const auto s = tt_schedule_frame(pending, {}, {1, {}}, rng);
  EXPECT_EQ(s.served.at(0).device, kMouse);
}

TEST(TtSchedule, CapacityBoundsServed) {
  Rng rng(1);
  std::vector<InterruptTransaction> pending{key(0, 0), key(0, 1), mouse_poll(0, 2)};
  for (std::int64_t cap = 1; cap <= 4; ++cap) {
    const auto s = tt_schedule_frame(pending, {}, {cap, {}}, rng);
    EXPECT_EQ(s.served.size(), static_cast<std::size_t>(std::min<std::int64_t>(cap, 3)));
    EXPECT_EQ(s.served.size() + s.deferred.size(), 3u);
  }
}

TEST(TtSchedule, PriorityPolicyOverridesArrival) {
  Rng rng(1);
  ArbitrationPolicy p{ArbitrationKind::unfair_priority, {kMouse}, 0};
  std::vector<InterruptTransaction> pending{key(0, 0), mouse_poll(1, 1)};
  const auto s = tt_schedule_frame(pending, p, {1, {}}, rng);
  EXPECT_EQ(s.served.at(0).device, kMouse);
}

TEST(TtSchedule, RandomizedWastesGrantsOnIdleDevices) {
  Rng rng(7);
  ArbitrationPolicy p{ArbitrationKind::randomized_allocation, {}, 0};
  const std::vector<DeviceId> connected{kMouse, kKeyboard};
  int wasted = 0, served = 0;
  for (int f = 0; f < 2000; ++f) {
    std::vector<InterruptTransaction> pending{mouse_poll(f, 0)};
    const auto s = tt_schedule_frame(pending, p, {1, connected}, rng);
    wasted += static_cast<int>(s.wasted_grants);
    served += static_cast<int>(s.served.size());
    EXPECT_EQ(s.served.size() + s.deferred.size(), 1u);
  }
  EXPECT_EQ(wasted + served, 2000);
  EXPECT_NEAR(wasted / 2000.0, 0.5, 0.05);
}

TEST(BulkSchedule, FairAlternationSevenSix) {
  Rng rng(1);
  const std::vector<BulkDemand> demand{{1, 8}, {2, 10}};
  const auto a = bulk_schedule_microframe(demand, limits512(), {}, 0, rng);
  EXPECT_EQ(a.granted, (std::vector<std::int64_t>{7, 6}));
  EXPECT_EQ(a.total(), 13);
  // Slots alternate starting at the spy.
  for (std::size_t j = 0; j < a.slot_owner.size(); ++j) EXPECT_EQ(a.slot_owner[j], j % 2);
}

TEST(BulkSchedule, NoContention) {
  Rng rng(1);
  const std::vector<BulkDemand> demand{{1, 8}, {2, 0}};
  const auto a = bulk_schedule_microframe(demand, limits512(), {}, 0, rng);
  EXPECT_EQ(a.granted, (std::vector<std::int64_t>{8, 0}));
}

TEST(BulkSchedule, PriorityVictimFirst) {
  Rng rng(1);
  ArbitrationPolicy p{ArbitrationKind::unfair_priority, {2}, 0};
  const std::vector<BulkDemand> demand{{1, 20}, {2, 20}};
  const auto a = bulk_schedule_microframe(demand, limits512(), p, 0, rng);
  EXPECT_EQ(a.granted, (std::vector<std::int64_t>{0, 13}));
}

TEST(BulkSchedule, WorkConservingFairAndPriority) {
  Rng demand_rng(99);
  Rng rng(3);
  const ArbitrationPolicy policies[] = {
      {ArbitrationKind::fair_round_robin, {}, 0},
      {ArbitrationKind::unfair_priority, {3, 1}, 0},
  };
  for (int trial = 0; trial < 500; ++trial) {
    const auto payload = std::int64_t{1} << demand_rng.below(10);
    const auto lim = usb::bulk_limits(usb::PayloadSize(payload));
    std::vector<BulkDemand> demand;
    std::int64_t sum = 0;
    const auto n = 1 + demand_rng.below(4);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto d = demand_rng.between(0, 200);
      demand.push_back({static_cast<DeviceId>(i + 1), d});
      sum += d;
    }
    for (const auto& p : policies) {
      const auto a = bulk_schedule_microframe(demand, lim, p, demand_rng.below(n), rng);
      EXPECT_EQ(a.total(), std::min(sum, lim.transfers_per_microframe));
      EXPECT_EQ(static_cast<std::int64_t>(a.slot_owner.size()), a.total());
      for (std::size_t i = 0; i < demand.size(); ++i) {
        EXPECT_GE(a.granted[i], 0);
        EXPECT_LE(a.granted[i], demand[i].pending);
      }
    }
  }
}

TEST(BulkSchedule, FairIsDeterministic) {
  Rng a(1), b(2);
  const std::vector<BulkDemand> demand{{1, 8}, {2, 10}, {3, 4}};
  const auto x = bulk_schedule_microframe(demand, limits512(), {}, 1, a);
  const auto y = bulk_schedule_microframe(demand, limits512(), {}, 1, b);
  EXPECT_EQ(x.granted, y.granted);
  EXPECT_EQ(x.slot_owner, y.slot_owner);
}

TEST(BulkSchedule, RandomizedShareIgnoresOtherDemand) {
  // The spy's mean share is the same whether the victim is idle or saturating.
  const ArbitrationPolicy p{ArbitrationKind::randomized_allocation, {}, 0};
  const auto lim = limits512();
  double idle = 0, busy = 0;
  Rng a(5), b(5);
  const int rounds = 4000;
  for (int r = 0; r < rounds; ++r) {
    const std::vector<BulkDemand> quiet{{1, 100}, {2, 0}};
    const std::vector<BulkDemand> loud{{1, 100}, {2, 100}};
    const auto qa = bulk_schedule_microframe(quiet, lim, p, 0, a);
    const auto lb = bulk_schedule_microframe(loud, lim, p, 0, b);
    EXPECT_LE(qa.total(), lim.transfers_per_microframe);
    EXPECT_EQ(qa.granted[1], 0);
    idle += static_cast<double>(qa.granted[0]);
    busy += static_cast<double>(lb.granted[0]);
  }
  EXPECT_DOUBLE_EQ(idle, busy);  // same stream, same draws
  EXPECT_NEAR(idle / rounds, 6.5, 0.15);
}

TEST(BulkSchedule, RandomizedNeverExceedsDemand) {
  Rng rng(8);
  const ArbitrationPolicy p{ArbitrationKind::randomized_allocation, {}, 0};
  for (int r = 0; r < 500; ++r) {
    const std::vector<BulkDemand> d{{1, rng.between(0, 5)}, {2, rng.between(0, 20)}, {3, rng.between(0, 3)}};
    const auto al = bulk_schedule_microframe(d, limits512(), p, 0, rng);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_LE(al.granted[i], d[i].pending);
    EXPECT_EQ(static_cast<std::int64_t>(al.slot_owner.size()), al.total());
  }
}
