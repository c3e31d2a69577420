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
#include <string_view>
#include <vector>

#include "hublab/usb/bulk_limits.hpp"

namespace hublab::usb {

using DeviceId = std::uint32_t;

/// Label only: every class shares the same device-layer model.
enum class SpeedClass { usb2, usb3x, usbc };

enum class ArbitrationKind {
  /// Oldest request first; keyboard before mouse on ties. Bulk slots
  /// alternate across devices with pending work.
  fair_round_robin,
  /// Slot split drawn from a seeded stream (bulk); per-frame TT grant drawn
  /// uniformly over connected devices (interrupt).
  randomized_allocation,
  /// Strict priority order; no fairness.
  unfair_priority,
};

struct ArbitrationPolicy {
  ArbitrationKind kind = ArbitrationKind::fair_round_robin;
  /// unfair_priority: device ids, highest priority first. Devices missing from
  /// the list rank below all listed ones, in id order.
  std::vector<DeviceId> priority;
  /// Salt mixed into the simulation seed for the randomized policy stream.
  std::uint64_t stream_salt = 0;

  /// Rank of a device under unfair_priority (lower is served first).
  std::size_t priority_rank(DeviceId id) const;
};

struct HubConfig {
  SpeedClass speed_class = SpeedClass::usb2;
  /// 1 = single TT shared by all low/full-speed ports.
  std::int64_t tt_count = 1;
  PayloadSize bulk_payload{512};
  ArbitrationPolicy arbitration;
  /// Interrupt transactions the TT completes per 1 ms frame.
  std::int64_t tt_frame_capacity = 1;
  std::int64_t frame_us = kFrameUs;
  std::int64_t microframe_us = kMicroframeUs;

  /// Throws ConfigError on violated invariants.
  void validate() const;

  /// Canonical "key=value;..." text used for digests.
  std::string canonical() const;
  std::string digest() const;
};

std::string_view to_string(SpeedClass c);
std::string_view to_string(ArbitrationKind k);
SpeedClass parse_speed_class(std::string_view s);
ArbitrationKind parse_arbitration_kind(std::string_view s);

}  // namespace hublab::usb
