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
#include <span>
#include <vector>

#include "hublab/common/rng.hpp"
#include "hublab/usb/bulk_limits.hpp"
#include "hublab/usb/hub_config.hpp"

namespace hublab::sim {

using usb::DeviceId;

enum class InterruptRole { mouse, keyboard, other };

/// One pending low/full-speed interrupt transaction behind a TT.
struct InterruptTransaction {
  DeviceId device = 0;
  InterruptRole role = InterruptRole::other;
  std::int64_t arrival_frame = 0;
  std::uint64_t seq = 0;  // global arrival counter, final tie-break

  friend bool operator==(const InterruptTransaction&, const InterruptTransaction&) = default;
};

struct TtFrameContext {
  std::int64_t capacity = 1;
  /// Devices attached to this TT. Only consulted by randomized_allocation,
  /// where a grant to a device with nothing pending is spent on a NAKed poll.
  std::span<const DeviceId> connected;
};

struct FrameSchedule {
  std::vector<InterruptTransaction> served;    // in service order
  std::vector<InterruptTransaction> deferred;  // carried into the next frame
  std::int64_t wasted_grants = 0;
};

/// One 1 ms frame of single-TT service. At most ctx.capacity transactions are
/// served; the rest are deferred.
///   fair_round_robin: oldest arrival frame first, keyboard before mouse
///     before other within a frame, then arrival order.
///   randomized_allocation: each grant goes to a uniformly drawn connected
///     device; a device with nothing pending wastes the grant.
///   unfair_priority: policy priority order, then arrival.
FrameSchedule tt_schedule_frame(std::span<const InterruptTransaction> pending,
                                const usb::ArbitrationPolicy& policy, const TtFrameContext& ctx,
                                Rng& rng);

struct BulkDemand {
  DeviceId device = 0;
  std::int64_t pending = 0;  // queued bulk transactions
};

struct SlotAllocation {
  std::vector<std::int64_t> granted;     // parallel to the demand span
  std::vector<std::size_t> slot_owner;   // demand index for each used slot, in bus order
  std::size_t next_start = 0;            // round-robin pointer for the next microframe

  std::int64_t total() const;
};

/// One microframe of bulk-slot arbitration.
///   fair_round_robin: slots alternate over devices with pending work,
///     beginning at index rr_start. Work conserving.
///   randomized_allocation: every slot is drawn uniformly over all entries of
///     `demand` (the connected devices) and idles if the drawn device has no
///     pending work. Not work conserving: a device's share no longer depends
///     on what the others are doing.
///   unfair_priority: drain queues in priority order. Work conserving.
SlotAllocation bulk_schedule_microframe(std::span<const BulkDemand> demand,
                                        const usb::BulkLimits& limits,
                                        const usb::ArbitrationPolicy& policy,
                                        std::size_t rr_start, Rng& rng);

}  // namespace hublab::sim
