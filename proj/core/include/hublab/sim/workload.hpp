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
#include <optional>
#include <string>
#include <vector>

#include "hublab/sim/scheduler.hpp"
#include "hublab/sim/trace.hpp"
#include "hublab/usb/bulk_limits.hpp"

namespace hublab::sim {

/// Low/full-speed interrupt endpoint behind a TT.
struct InterruptDevice {
  DeviceId id = 0;
  InterruptRole role = InterruptRole::other;
  /// Continuous devices (mouse jiggler) have a report ready at every poll.
  std::int64_t poll_interval_us = 1000;
  bool continuous = false;
  /// Event-driven devices (keyboard): one transaction per event time.
  std::vector<std::int64_t> event_times_us;
  /// Downstream port; TT index = port % tt_count.
  std::int64_t port = 0;
};

struct BulkRequest {
  std::int64_t t_us = 0;
  std::int64_t bytes = 0;
};

/// Spy-style reader that keeps `queue_depth` reads in flight and reissues a
/// read as soon as one completes (eligible from the next microframe).
struct ClosedLoopReader {
  std::int64_t read_bytes = 4096;
  std::int64_t queue_depth = 1;
};

struct BulkDevice {
  DeviceId id = 0;
  std::vector<BulkRequest> requests;  // open-loop stream, sorted by t_us
  std::optional<ClosedLoopReader> closed_loop;
};

/// Additive timestamp jitter on spy completions, uniform in [0, jitter_us].
struct NoiseModel {
  std::int64_t jitter_us = 50;
};

/// Receive aggregation in the victim's USB network adapter: packets are
/// buffered and handed to the host as one bulk request when the buffer
/// reaches max_bytes or flush_us after the first buffered byte. max_bytes = 0
/// forwards every packet as its own request.
struct NicAggregation {
  std::int64_t max_bytes = 16384;
  std::int64_t flush_us = 300;

  friend bool operator==(const NicAggregation&, const NicAggregation&) = default;
};

std::vector<BulkRequest> aggregate_requests(const TrafficTimeline& traffic, const NicAggregation& agg);

struct Workload {
  std::string scenario;
  std::string label;
  std::vector<InterruptDevice> interrupt_devices;
  std::vector<BulkDevice> bulk_devices;
  DeviceId spy_device_id = 0;
  NoiseModel noise;
  /// Ground truth carried through to the TraceBundle.
  std::optional<KeyEventTrace> key_truth;
  std::optional<TrafficTimeline> traffic_truth;

  /// Throws ConfigError: unknown/duplicated spy, unsorted streams, streams
  /// past the end of the run.
  void validate(std::int64_t duration_us) const;
};

inline constexpr DeviceId kSpyDevice = 1;
inline constexpr DeviceId kVictimDevice = 2;

/// Mouse jiggler (spy, polled every 1 ms) plus a keyboard emitting one
/// transaction per press and per release.
Workload keystroke_workload(const KeyEventTrace& keys, NoiseModel noise = {});

/// Closed-loop disk reader (spy) plus a network adapter whose bulk requests
/// are the timeline points.
Workload web_workload(const TrafficTimeline& traffic, NoiseModel noise = {},
                      ClosedLoopReader spy = {}, NicAggregation nic = {});

}  // namespace hublab::sim
