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

#include "hublab/sim/workload.hpp"

#include <algorithm>

#include "hublab/common/error.hpp"

namespace hublab::sim {

void Workload::validate(std::int64_t duration_us) const {
  int spy_hits = 0;
  std::vector<DeviceId> ids;
  for (const auto& d : interrupt_devices) {
    ids.push_back(d.id);
    if (d.id == spy_device_id) ++spy_hits;
    if (d.poll_interval_us <= 0) throw ConfigError("interrupt poll interval must be > 0");
    if (!std::is_sorted(d.event_times_us.begin(), d.event_times_us.end())) {
      throw ConfigError("interrupt event stream of device " + std::to_string(d.id) + " not sorted");
    }
    if (!d.event_times_us.empty() && d.event_times_us.back() >= duration_us) {
      throw ConfigError("interrupt events of device " + std::to_string(d.id) +
                        " extend past the simulated duration");
    }
  }
  for (const auto& d : bulk_devices) {
    ids.push_back(d.id);
    if (d.id == spy_device_id) ++spy_hits;
    if (!std::is_sorted(d.requests.begin(), d.requests.end(),
                        [](const auto& a, const auto& b) { return a.t_us < b.t_us; })) {
      throw ConfigError("bulk request stream of device " + std::to_string(d.id) + " not sorted");
    }
    if (!d.requests.empty() && d.requests.back().t_us >= duration_us) {
      throw ConfigError("bulk requests of device " + std::to_string(d.id) +
                        " extend past the simulated duration");
    }
    if (d.closed_loop && (d.closed_loop->read_bytes <= 0 || d.closed_loop->queue_depth <= 0)) {
      throw ConfigError("closed-loop reader needs positive read size and queue depth");
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ConfigError("duplicate device id in workload");
  }
  if (spy_hits == 0) {
    throw ConfigError("spy device " + std::to_string(spy_device_id) + " is not in the workload");
  }
  if (noise.jitter_us < 0) throw ConfigError("noise jitter must be >= 0");
}

Workload keystroke_workload(const KeyEventTrace& keys, NoiseModel noise) {
  Workload w;
  w.scenario = "keystroke";
  w.label = keys.word;
  InterruptDevice mouse;
  mouse.id = kSpyDevice;
  mouse.role = InterruptRole::mouse;
  mouse.poll_interval_us = 1000;
  mouse.continuous = true;
  mouse.port = 0;
  InterruptDevice keyboard;
  keyboard.id = kVictimDevice;
  keyboard.role = InterruptRole::keyboard;
  keyboard.poll_interval_us = 1000;
  keyboard.port = 1;
  for (const auto& e : keys.events) keyboard.event_times_us.push_back(e.t_us);
  std::sort(keyboard.event_times_us.begin(), keyboard.event_times_us.end());
  w.interrupt_devices = {mouse, keyboard};
  w.spy_device_id = kSpyDevice;
  w.noise = noise;
  w.key_truth = keys;
  return w;
}

std::vector<BulkRequest> aggregate_requests(const TrafficTimeline& traffic, const NicAggregation& agg) {
  std::vector<BulkRequest> out;
  if (agg.max_bytes <= 0) {
    out.reserve(traffic.points.size());
    for (const auto& p : traffic.points) out.push_back({p.t_us, p.bytes});
    return out;
  }
  std::int64_t buffered = 0;
  std::int64_t deadline = 0;
  for (const auto& p : traffic.points) {
    if (buffered > 0 && p.t_us >= deadline) {
      out.push_back({deadline, buffered});
      buffered = 0;
    }
    if (buffered == 0) deadline = p.t_us + agg.flush_us;
    buffered += p.bytes;
    while (buffered >= agg.max_bytes) {
      out.push_back({p.t_us, agg.max_bytes});
      buffered -= agg.max_bytes;
      deadline = p.t_us + agg.flush_us;
    }
  }
  if (buffered > 0) out.push_back({deadline, buffered});
  return out;
}

Workload web_workload(const TrafficTimeline& traffic, NoiseModel noise, ClosedLoopReader spy,
                      NicAggregation nic) {
  Workload w;
  w.scenario = "website";
  BulkDevice disk;
  disk.id = kSpyDevice;
  disk.closed_loop = spy;
  BulkDevice adapter;
  adapter.id = kVictimDevice;
  adapter.requests = aggregate_requests(traffic, nic);
  w.bulk_devices = {disk, adapter};
  w.spy_device_id = kSpyDevice;
  w.noise = noise;
  w.traffic_truth = traffic;
  return w;
}

}  // namespace hublab::sim
