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
#include <map>

#include "hublab/sim/trace.hpp"
#include "hublab/sim/workload.hpp"
#include "hublab/usb/hub_config.hpp"

namespace hublab::sim {

/// Bookkeeping exposed for invariant checks; not part of the trace output.
struct SimStats {
  std::int64_t frames = 0;
  std::int64_t microframes = 0;
  std::int64_t max_slots_in_microframe = 0;
  /// Slots left unused while some device had an eligible transaction.
  std::int64_t idle_slots_with_pending = 0;
  std::int64_t wasted_tt_grants = 0;
  std::map<DeviceId, std::int64_t> bulk_bytes_delivered;
  std::map<DeviceId, std::int64_t> transactions_served;
};

struct SimulationResult {
  TraceBundle bundle;
  SimStats stats;
};

/// Frame/microframe discrete-event run of the hub's device layer.
///
/// Interrupt devices are scheduled per 1 ms frame through their TT; bulk
/// devices are arbitrated per 125 us microframe. The spy's completion times
/// are jittered with a stream derived from `seed`, then turned into
/// inter-completion delays (the first completion is the reference point and
/// produces no record). Equal inputs give bit-identical output.
SimulationResult simulate(const usb::HubConfig& hub, const Workload& workload,
                          std::int64_t duration_us, std::uint64_t seed);

TraceBundle run_simulation(const usb::HubConfig& hub, const Workload& workload,
                           std::int64_t duration_us, std::uint64_t seed);

}  // namespace hublab::sim
