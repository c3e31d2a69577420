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
#include <vector>

#include "hublab/sim/trace.hpp"

namespace hublab::keystroke {

struct DetectorConfig {
  double event_threshold_ms = 1.8;
  /// Press/release pairs closer than this are treated as overlapping
  /// keystrokes when labeling.
  double overlap_threshold_ms = 50.0;
  /// Above-threshold records closer than this collapse into one event.
  double merge_window_ms = 3.0;
  /// A detection with no other detection within +/- this window is dropped
  /// as a noise spike. Only applied where the window lies inside the trace.
  /// 0 disables the rule.
  double companion_window_ms = 1000.0;

  void validate() const;  // throws DomainError
};

struct DetectedEvent {
  std::int64_t t_us = 0;      // timestamp of the above-threshold record
  std::int64_t onset_us = 0;  // previous completion + half the baseline delay
  std::int64_t delay_us = 0;

  friend bool operator==(const DetectedEvent&, const DetectedEvent&) = default;
};

/// Threshold, merge, then isolation filter. The baseline is the trace's
/// median delay. Throws DomainError on an empty trace.
std::vector<DetectedEvent> detect_key_events(const sim::SpyTrace& spy, const DetectorConfig& cfg = {});

struct LabeledEvent {
  DetectedEvent event;
  sim::KeyAction label = sim::KeyAction::press;  // blind assignment
  bool overlap = false;                          // swapped by the overlap rule
  /// Nearest ground-truth event (index into truth.events), -1 if none.
  std::int64_t truth_index = -1;
  bool correct = false;
};

/// Blind press/release labeling from timing alone: alternate starting with a
/// press, then any (release, press) pair closer than overlap_threshold is
/// flipped to (press, release).
std::vector<LabeledEvent> assign_labels(const std::vector<DetectedEvent>& events,
                                        const DetectorConfig& cfg = {});

struct LabelReport {
  std::vector<LabeledEvent> events;
  std::size_t truth_events = 0;
  std::size_t correct = 0;
  std::size_t overlaps_flagged = 0;
  bool empty_input = false;
  /// correct / truth_events; 0 for empty input.
  double accuracy = 0.0;
};

/// Pairs each estimate with the nearest unclaimed truth event (by onset, within
/// match_tolerance_ms) and scores the blind labels against it.
LabelReport label_events(const std::vector<DetectedEvent>& estimates, const sim::KeyEventTrace& truth,
                         const DetectorConfig& cfg = {}, double match_tolerance_ms = 2.0);

struct DetectionScore {
  std::size_t true_positives = 0;
  std::size_t detected = 0;
  std::size_t truth = 0;
  double precision() const;
  double recall() const;
  double f1() const;
};

/// One-to-one time matching of estimate onsets against truth events.
DetectionScore score_detection(const std::vector<DetectedEvent>& estimates,
                               const sim::KeyEventTrace& truth, double match_tolerance_ms = 2.0);

/// Press-to-press intervals in ms. Throws DomainError for fewer than 2 presses.
std::vector<double> extract_digram_latencies(const std::vector<std::int64_t>& press_times_us);

/// Onsets of events labeled as presses.
std::vector<std::int64_t> press_onsets(const std::vector<LabeledEvent>& labeled);

}  // namespace hublab::keystroke
