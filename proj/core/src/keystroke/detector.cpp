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

#include "hublab/keystroke/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hublab/common/error.hpp"
#include "hublab/common/stats.hpp"

namespace hublab::keystroke {
namespace {

std::int64_t ms_to_us(double ms) { return static_cast<std::int64_t>(std::llround(ms * 1000.0)); }

}  // namespace

void DetectorConfig::validate() const {
  if (!(event_threshold_ms > 0.0)) throw DomainError("event threshold must be > 0");
  if (!(overlap_threshold_ms > event_threshold_ms)) {
    throw DomainError("overlap threshold must exceed the event threshold");
  }
  if (!(merge_window_ms > 0.0)) throw DomainError("merge window must be > 0");
  if (!(companion_window_ms >= 0.0)) throw DomainError("companion window must be >= 0");
}

std::vector<DetectedEvent> detect_key_events(const sim::SpyTrace& spy, const DetectorConfig& cfg) {
  cfg.validate();
  if (spy.records.empty()) throw DomainError("cannot detect events in an empty trace");

  const double baseline = median(spy.delays_us());
  const auto base_us = static_cast<std::int64_t>(std::llround(baseline));
  const std::int64_t threshold = ms_to_us(cfg.event_threshold_ms);
  const std::int64_t merge = ms_to_us(cfg.merge_window_ms);

  std::vector<DetectedEvent> raw;
  std::int64_t last_hit = std::numeric_limits<std::int64_t>::min();
  for (const auto& r : spy.records) {
    if (r.delay_us < threshold) continue;
    if (!raw.empty() && r.t_us - last_hit <= merge) {
      last_hit = r.t_us;
      raw.back().delay_us = std::max(raw.back().delay_us, r.delay_us);
      continue;
    }
    raw.push_back({r.t_us, r.t_us - r.delay_us + base_us / 2, r.delay_us});
    last_hit = r.t_us;
  }

  const std::int64_t window = ms_to_us(cfg.companion_window_ms);
  if (window == 0) return raw;

  const std::int64_t span_begin = spy.records.front().t_us - spy.records.front().delay_us;
  const std::int64_t span_end = std::max(spy.records.back().t_us, spy.meta.duration_us);
  std::vector<DetectedEvent> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const bool has_prev = i > 0 && raw[i].t_us - raw[i - 1].t_us <= window;
    const bool has_next = i + 1 < raw.size() && raw[i + 1].t_us - raw[i].t_us <= window;
    const bool observable = raw[i].t_us - window >= span_begin && raw[i].t_us + window <= span_end;
    if (has_prev || has_next || !observable) out.push_back(raw[i]);
  }
  return out;
}

std::vector<LabeledEvent> assign_labels(const std::vector<DetectedEvent>& events,
                                        const DetectorConfig& cfg) {
  cfg.validate();
  std::vector<LabeledEvent> out(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    out[i].event = events[i];
    out[i].label = i % 2 == 0 ? sim::KeyAction::press : sim::KeyAction::release;
  }
  const std::int64_t gap = ms_to_us(cfg.overlap_threshold_ms);
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    if (out[i].label != sim::KeyAction::release || out[i + 1].label != sim::KeyAction::press) continue;
    if (out[i + 1].event.onset_us - out[i].event.onset_us >= gap) continue;
    out[i].label = sim::KeyAction::press;
    out[i + 1].label = sim::KeyAction::release;
    out[i].overlap = out[i + 1].overlap = true;
    ++i;
  }
  return out;
}

namespace {

// Greedy one-to-one matching of onsets to truth times, both sorted. Returns
// the truth index per estimate or -1.
std::vector<std::int64_t> match_onsets(const std::vector<std::int64_t>& onsets,
                                       const std::vector<sim::KeyEvent>& truth, std::int64_t tol) {
  std::vector<std::int64_t> match(onsets.size(), -1);
  std::vector<bool> claimed(truth.size(), false);
  std::size_t lo = 0;
  for (std::size_t i = 0; i < onsets.size(); ++i) {
    while (lo < truth.size() && truth[lo].t_us < onsets[i] - tol) ++lo;
    std::int64_t best = -1;
    std::int64_t best_d = std::numeric_limits<std::int64_t>::max();
    for (std::size_t j = lo; j < truth.size() && truth[j].t_us <= onsets[i] + tol; ++j) {
      if (claimed[j]) continue;
      const std::int64_t d = std::abs(truth[j].t_us - onsets[i]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::int64_t>(j);
      }
    }
    if (best >= 0) {
      claimed[static_cast<std::size_t>(best)] = true;
      match[i] = best;
    }
  }
  return match;
}

std::vector<std::int64_t> onsets_of(const std::vector<DetectedEvent>& events) {
  std::vector<std::int64_t> o;
  o.reserve(events.size());
  for (const auto& e : events) o.push_back(e.onset_us);
  return o;
}

}  // namespace

LabelReport label_events(const std::vector<DetectedEvent>& estimates, const sim::KeyEventTrace& truth,
                         const DetectorConfig& cfg, double match_tolerance_ms) {
  LabelReport rep;
  rep.truth_events = truth.events.size();
  if (estimates.empty()) {
    rep.empty_input = true;
    return rep;
  }
  rep.events = assign_labels(estimates, cfg);
  const auto match = match_onsets(onsets_of(estimates), truth.events, ms_to_us(match_tolerance_ms));
  for (std::size_t i = 0; i < rep.events.size(); ++i) {
    auto& le = rep.events[i];
    le.truth_index = match[i];
    if (le.overlap) ++rep.overlaps_flagged;
    if (match[i] >= 0 && truth.events[static_cast<std::size_t>(match[i])].kind == le.label) {
      le.correct = true;
      ++rep.correct;
    }
  }
  rep.accuracy = rep.truth_events == 0 ? 0.0
                                       : static_cast<double>(rep.correct) /
                                             static_cast<double>(rep.truth_events);
  return rep;
}

double DetectionScore::precision() const {
  return detected == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(detected);
}
double DetectionScore::recall() const {
  return truth == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(truth);
}
double DetectionScore::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

DetectionScore score_detection(const std::vector<DetectedEvent>& estimates,
                               const sim::KeyEventTrace& truth, double match_tolerance_ms) {
  DetectionScore s;
  s.detected = estimates.size();
  s.truth = truth.events.size();
  const auto match = match_onsets(onsets_of(estimates), truth.events, ms_to_us(match_tolerance_ms));
  s.true_positives = static_cast<std::size_t>(std::count_if(match.begin(), match.end(),
                                                            [](std::int64_t m) { return m >= 0; }));
  return s;
}

std::vector<double> extract_digram_latencies(const std::vector<std::int64_t>& press_times_us) {
  if (press_times_us.size() < 2) throw DomainError("need at least two presses for a digram latency");
  std::vector<double> out;
  out.reserve(press_times_us.size() - 1);
  for (std::size_t i = 1; i < press_times_us.size(); ++i) {
    const std::int64_t d = press_times_us[i] - press_times_us[i - 1];
    if (d <= 0) throw DomainError("press times must be strictly increasing");
    out.push_back(static_cast<double>(d) / 1000.0);
  }
  return out;
}

std::vector<std::int64_t> press_onsets(const std::vector<LabeledEvent>& labeled) {
  std::vector<std::int64_t> out;
  for (const auto& e : labeled) {
    if (e.label == sim::KeyAction::press) out.push_back(e.event.onset_us);
  }
  return out;
}

}  // namespace hublab::keystroke
