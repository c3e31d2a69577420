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

namespace hublab::sim {

enum class KeyAction { press, release };

struct KeyEvent {
  std::int64_t t_us = 0;
  KeyAction kind = KeyAction::press;
  char ch = 0;

  friend bool operator==(const KeyEvent&, const KeyEvent&) = default;
};

/// Ground-truth keyboard activity: one press and one release per character,
/// sorted by time.
struct KeyEventTrace {
  std::vector<KeyEvent> events;
  std::string word;

  friend bool operator==(const KeyEventTrace&, const KeyEventTrace&) = default;
};

struct TrafficPoint {
  std::int64_t t_us = 0;
  std::int64_t bytes = 0;

  friend bool operator==(const TrafficPoint&, const TrafficPoint&) = default;
};

/// Ground-truth victim network volume; t_us non-decreasing, bytes > 0.
struct TrafficTimeline {
  std::vector<TrafficPoint> points;

  std::int64_t total_bytes() const;
  friend bool operator==(const TrafficTimeline&, const TrafficTimeline&) = default;
};

struct SpyRecord {
  std::int64_t t_us = 0;
  std::int64_t delay_us = 0;

  friend bool operator==(const SpyRecord&, const SpyRecord&) = default;
};

struct TraceMetadata {
  std::string scenario;
  std::string label;  // word or site label; empty when not applicable
  std::uint64_t seed = 0;
  std::string hub_digest;
  std::int64_t noise_jitter_us = 0;
  std::int64_t duration_us = 0;

  friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

/// Inter-completion delays seen by the spy. t_us strictly increasing,
/// delay_us(i) = t_us(i) - t_us(i-1) > 0.
struct SpyTrace {
  std::vector<SpyRecord> records;
  TraceMetadata meta;

  /// Throws DomainError if the ordering/delay invariants do not hold.
  void check_invariants() const;
  std::vector<double> delays_us() const;
  friend bool operator==(const SpyTrace&, const SpyTrace&) = default;
};

struct TraceBundle {
  SpyTrace spy;
  std::optional<KeyEventTrace> key_truth;
  std::optional<TrafficTimeline> traffic_truth;
  std::uint64_t noise_seed = 0;

  friend bool operator==(const TraceBundle&, const TraceBundle&) = default;
};

}  // namespace hublab::sim
