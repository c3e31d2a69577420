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

#include "hublab/scenarios/web_traffic.hpp"
#include "hublab/sim/trace.hpp"

namespace hublab::web {

inline constexpr double kDefaultWindowMs = 5.0;

struct FeatureSequence {
  std::vector<double> values;  // max spy delay per window, ms
  double window_ms = kDefaultWindowMs;
  std::optional<std::string> label;

  friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;
};

/// Per-window maximum spy delay in ms. Length is ceil(duration / window),
/// where duration is meta.duration_us or, if unset, last timestamp + 1.
/// Windows without records carry the trace's median delay.
FeatureSequence featurize(const sim::SpyTrace& spy, double window_ms = kDefaultWindowMs);

/// Victim bytes per window; points past the last window are ignored.
std::vector<double> bin_traffic(const sim::TrafficTimeline& truth, double window_ms,
                                std::size_t windows);

/// Mean of consecutive groups of `factor` values (last group may be short).
std::vector<double> mean_pool(const std::vector<double>& values, std::size_t factor);

struct Correlation {
  double r = 0.0;
  bool defined = false;  // false when either series has zero variance
};

/// Pearson r. Throws DomainError on length mismatch or empty input.
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);
Correlation correlate(const FeatureSequence& features, const std::vector<double>& binned_truth);

struct IdleBaseline {
  double baseline_ms = 0.0;  // median of windows outside every annotation
  double mad_ms = 0.0;
};

IdleBaseline idle_baseline(const FeatureSequence& features,
                           const std::vector<scenarios::BurstAnnotation>& annotations);

struct SizeDetection {
  std::int64_t size_bytes = 0;
  std::int64_t detected = 0;
  std::int64_t repeats = 0;
  double rate() const { return repeats ? static_cast<double>(detected) / repeats : 0.0; }

  friend bool operator==(const SizeDetection&, const SizeDetection&) = default;
};

/// A burst counts as detected when any window overlapping its annotation
/// exceeds baseline + threshold. Results are ordered by first appearance of
/// each size.
std::vector<SizeDetection> detect_bursts(const FeatureSequence& features,
                                         const std::vector<scenarios::BurstAnnotation>& annotations,
                                         double baseline_ms, double threshold_ms);

}  // namespace hublab::web
