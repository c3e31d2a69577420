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

#include "hublab/usb/hub_config.hpp"

#include <algorithm>

#include "hublab/common/error.hpp"
#include "hublab/common/stats.hpp"

namespace hublab::usb {

std::size_t ArbitrationPolicy::priority_rank(DeviceId id) const {
  auto it = std::find(priority.begin(), priority.end(), id);
  if (it != priority.end()) return static_cast<std::size_t>(it - priority.begin());
  return priority.size() + id;
}

void HubConfig::validate() const {
  if (tt_count < 1) throw ConfigError("tt_count must be >= 1");
  if (tt_frame_capacity < 1) throw ConfigError("tt_frame_capacity must be >= 1");
  if (microframe_us <= 0 || frame_us <= 0 || frame_us % microframe_us != 0) {
    throw ConfigError("microframe_us must divide frame_us");
  }
}

std::string HubConfig::canonical() const {
  std::string s;
  s += "speed=" + std::string(to_string(speed_class));
  s += ";tt_count=" + std::to_string(tt_count);
  s += ";payload=" + std::to_string(bulk_payload.bytes());
  s += ";arbitration=" + std::string(to_string(arbitration.kind));
  s += ";priority=";
  for (std::size_t i = 0; i < arbitration.priority.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(arbitration.priority[i]);
  }
  s += ";salt=" + std::to_string(arbitration.stream_salt);
  s += ";tt_capacity=" + std::to_string(tt_frame_capacity);
  s += ";frame_us=" + std::to_string(frame_us);
  s += ";microframe_us=" + std::to_string(microframe_us);
  return s;
}

std::string HubConfig::digest() const { return hex64(fnv1a64(canonical())); }

std::string_view to_string(SpeedClass c) {
  switch (c) {
    case SpeedClass::usb2: return "usb2";
    case SpeedClass::usb3x: return "usb3x";
    case SpeedClass::usbc: return "usbc";
  }
  return "usb2";
}

std::string_view to_string(ArbitrationKind k) {
  switch (k) {
    case ArbitrationKind::fair_round_robin: return "fair_round_robin";
    case ArbitrationKind::randomized_allocation: return "randomized_allocation";
    case ArbitrationKind::unfair_priority: return "unfair_priority";
  }
  return "fair_round_robin";
}

SpeedClass parse_speed_class(std::string_view s) {
  if (s == "usb2") return SpeedClass::usb2;
  if (s == "usb3x") return SpeedClass::usb3x;
  if (s == "usbc") return SpeedClass::usbc;
  throw ConfigError("unknown speed class: " + std::string(s));
}

ArbitrationKind parse_arbitration_kind(std::string_view s) {
  if (s == "fair_round_robin" || s == "fair") return ArbitrationKind::fair_round_robin;
  if (s == "randomized_allocation" || s == "randomized") return ArbitrationKind::randomized_allocation;
  if (s == "unfair_priority" || s == "priority") return ArbitrationKind::unfair_priority;
  throw ConfigError("unknown arbitration policy: " + std::string(s));
}

}  // namespace hublab::usb
