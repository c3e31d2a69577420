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

#include <sstream>

#include "hublab/common/error.hpp"
#include "hublab/sim/simulator.hpp"
#include "hublab/sim/trace_io.hpp"

using namespace hublab;
using namespace hublab::sim;

namespace {

KeyEventTrace keys_at(std::initializer_list<std::pair<std::int64_t, KeyAction>> evs) {
  KeyEventTrace k;
  k.word = "x";
  for (const auto& [t, a] : evs) k.events.push_back({t, a, 'x'});
  return k;
}

std::vector<std::int64_t> delays(const SpyTrace& t) {
  std::vector<std::int64_t> d;
  for (const auto& r : t.records) d.push_back(r.delay_us);
  return d;
}

}  // namespace

TEST(Simulator, IdleKeystrokeBusAllOneMs) {
  const auto w = keystroke_workload({}, NoiseModel{0});
  const auto b = run_simulation({}, w, 50'000, 1);
  ASSERT_EQ(b.spy.records.size(), 49u);
  for (const auto& r : b.spy.records) EXPECT_EQ(r.delay_us, 1000);
  EXPECT_NO_THROW(b.spy.check_invariants());
}

TEST(Simulator, SinglePressGivesOneTwoMsDelay) {
  const auto w = keystroke_workload(keys_at({{5000, KeyAction::press}}), NoiseModel{0});
  const auto b = run_simulation({}, w, 20'000, 1);
  int long_delays = 0;
  for (const auto& r : b.spy.records) {
    EXPECT_EQ(r.delay_us % 1000, 0);
    if (r.delay_us >= 2000) {
      ++long_delays;
      EXPECT_EQ(r.delay_us, 2000);
      EXPECT_EQ(r.t_us, 6000);  // frame 5 goes to the keyboard
    }
  }
  EXPECT_EQ(long_delays, 1);
}

TEST(Simulator, PressReleaseConsecutiveFramesTwoDelays) {
  const auto w = keystroke_workload(
      keys_at({{5000, KeyAction::press}, {6000, KeyAction::release}}), NoiseModel{0});
  const auto d = delays(run_simulation({}, w, 20'000, 1).spy);
  // Frame 5 keyboard, 6 deferred mouse, 7 keyboard, 8 deferred mouse.
  std::vector<std::int64_t> longs;
  for (auto x : d) {
    if (x > 1000) longs.push_back(x);
  }
  EXPECT_EQ(longs, (std::vector<std::int64_t>{2000, 2000}));
}

TEST(Simulator, WebIdleSpySteadyDelayDepthOne) {
  const auto w = web_workload({}, NoiseModel{0}, ClosedLoopReader{4096, 1});
  const auto b = run_simulation({}, w, 20'000, 1);
  ASSERT_GT(b.spy.records.size(), 100u);
  for (const auto& r : b.spy.records) EXPECT_EQ(r.delay_us, 125);
}

TEST(Simulator, BulkConservationAndWorkConservation) {
  TrafficTimeline traffic;
  for (int i = 0; i < 200; ++i) traffic.points.push_back({1000 + i * 300, 6000});
  const auto w = web_workload(traffic, NoiseModel{50});
  const usb::HubConfig hub;
  const auto r = simulate(hub, w, 100'000, 4);
  const auto lim = usb::bulk_limits(hub.bulk_payload);
  EXPECT_LE(r.stats.max_slots_in_microframe, lim.transfers_per_microframe);
  EXPECT_EQ(r.stats.idle_slots_with_pending, 0);
  std::int64_t bytes = 0;
  for (const auto& [id, b] : r.stats.bulk_bytes_delivered) bytes += b;
  EXPECT_LE(bytes, lim.bytes_per_second / 10);  // 100 ms
  EXPECT_EQ(r.stats.bulk_bytes_delivered.at(kVictimDevice), traffic.total_bytes());
}

TEST(Simulator, VictimTrafficNeverSpeedsSpy) {
  // Noiseless fair arbitration: the i-th spy completion never moves earlier
  // when victim traffic is added.
  const auto base = run_simulation({}, web_workload({}, NoiseModel{0}), 50'000, 1);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    TrafficTimeline traffic;
    std::int64_t t = 0;
    for (;;) {
      t += rng.between(50, 3000);
      if (t >= 45'000) break;
      traffic.points.push_back({t, rng.between(1, 20000)});
    }
    const auto loaded = run_simulation({}, web_workload(traffic, NoiseModel{0}), 50'000, 1);
    ASSERT_LE(loaded.spy.records.size(), base.spy.records.size());
    for (std::size_t i = 0; i < loaded.spy.records.size(); ++i) {
      ASSERT_GE(loaded.spy.records[i].t_us, base.spy.records[i].t_us) << "trial " << trial;
    }
  }
}

TEST(Simulator, DeterministicAndSeedOnlyMovesNoise) {
  KeyEventTrace k = keys_at({{3000, KeyAction::press}, {90'000, KeyAction::release}});
  const auto w = keystroke_workload(k);
  const auto a = run_simulation({}, w, 200'000, 11);
  const auto b = run_simulation({}, w, 200'000, 11);
  EXPECT_EQ(a, b);
  const auto c = run_simulation({}, w, 200'000, 12);
  EXPECT_NE(a.spy.records, c.spy.records);
  ASSERT_EQ(a.spy.records.size(), c.spy.records.size());
  for (std::size_t i = 0; i < a.spy.records.size(); ++i) {
    EXPECT_LE(std::abs(a.spy.records[i].t_us - c.spy.records[i].t_us), 50);
  }
}

TEST(Simulator, ConfigErrors) {
  Workload w = keystroke_workload({});
  w.spy_device_id = 77;
  EXPECT_THROW(run_simulation({}, w, 10'000, 1), ConfigError);
  const auto late = keystroke_workload(keys_at({{50'000, KeyAction::press}}));
  EXPECT_THROW(run_simulation({}, late, 10'000, 1), ConfigError);
  EXPECT_THROW(run_simulation({}, keystroke_workload({}), 500, 1), DomainError);
}

TEST(TraceIo, RoundTrip) {
  const auto w = keystroke_workload(keys_at({{3000, KeyAction::press}, {9000, KeyAction::release}}));
  const auto b = run_simulation({}, w, 30'000, 2);
  std::stringstream ss;
  write_trace(ss, b.spy);
  EXPECT_EQ(read_trace(ss), b.spy);
  std::stringstream ks;
  write_key_events(ks, *b.key_truth);
  EXPECT_EQ(read_key_events(ks), *b.key_truth);
  TrafficTimeline t{{{5, 100}, {9, 1}}};
  std::stringstream ts;
  write_traffic(ts, t);
  EXPECT_EQ(read_traffic(ts), t);
}

TEST(TraceIo, RejectsGarbage) {
  std::stringstream ss("# scenario=x\n12,abc\n");
  EXPECT_THROW(read_trace(ss), IoError);
  std::stringstream ks("10,tap,a\n");
  EXPECT_THROW(read_key_events(ks), IoError);
}
