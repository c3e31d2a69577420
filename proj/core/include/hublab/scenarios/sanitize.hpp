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
#include <string>
#include <vector>

#include "hublab/sim/trace.hpp"

namespace hublab::scenarios {

struct SanitizeConfig {
  /// Reject traces with fewer records than this fraction of the median
  /// record count of their scenario.
  double min_length_fraction = 0.5;
  /// Reject traces whose delay stddev is below this fraction of the
  /// scenario's median delay.
  double stddev_floor_fraction = 0.05;
};

struct Rejection {
  std::size_t index = 0;
  std::string reason;  // "short" or "no deviation"
  std::string detail;

  friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct SanitizeResult {
  std::vector<std::size_t> kept;  // indices into the input, ascending
  std::vector<Rejection> rejected;
};

/// What sanitization needs from one trace.
struct TraceSummary {
  std::string scenario;
  std::size_t records = 0;
  double median_delay_us = 0.0;  // 0 when there are no records
  double delay_stddev_us = 0.0;

  static TraceSummary of(const sim::SpyTrace& spy);
};

SanitizeResult sanitize_summaries(std::span<const TraceSummary> dataset, const SanitizeConfig& cfg = {});

/// Flags failed loads and dropouts. Scenario statistics are computed over
/// traces sharing meta.scenario. Throws DomainError on an empty dataset.
SanitizeResult sanitize_traces(std::span<const sim::TraceBundle> dataset,
                               const SanitizeConfig& cfg = {});

}  // namespace hublab::scenarios
