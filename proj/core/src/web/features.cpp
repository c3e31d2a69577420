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

#include "hublab/web/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hublab/common/error.hpp"
#include "hublab/common/stats.hpp"

namespace hublab::web {

FeatureSequence featurize(const sim::SpyTrace& spy, double window_ms) {
  if (!(window_ms > 0.0)) throw DomainError("featurize: window must be > 0");
  if (spy.records.empty()) throw DomainError("featurize: empty trace");
  const double window_us = window_ms * 1000.0;
  const std::int64_t duration =
      spy.meta.duration_us > 0 ? spy.meta.duration_us : spy.records.back().t_us + 1;
  const auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(duration) / window_us));

  FeatureSequence out;
  out.window_ms = window_ms;
  if (!spy.meta.label.empty()) out.label = spy.meta.label;
  std::vector<double> values(n, -1.0);
  for (const auto& r : spy.records) {
    const auto w = static_cast<std::size_t>(static_cast<double>(r.t_us) / window_us);
    if (w >= n) continue;
    values[w] = std::max(values[w], static_cast<double>(r.delay_us) / 1000.0);
  }
  const double fill = median(spy.delays_us()) / 1000.0;
  for (auto& v : values) {
    if (v < 0.0) v = fill;
  }
  out.values = std::move(values);
  return out;
}

std::vector<double> bin_traffic(const sim::TrafficTimeline& truth, double window_ms,
                                std::size_t windows) {
  if (!(window_ms > 0.0)) throw DomainError("bin_traffic: window must be > 0");
  std::vector<double> bins(windows, 0.0);
  const double window_us = window_ms * 1000.0;
  for (const auto& p : truth.points) {
    if (p.t_us < 0) continue;
    const auto w = static_cast<std::size_t>(static_cast<double>(p.t_us) / window_us);
    if (w < windows) bins[w] += static_cast<double>(p.bytes);
  }
  return bins;
}

std::vector<double> mean_pool(const std::vector<double>& values, std::size_t factor) {
  if (factor == 0) throw DomainError("mean_pool: factor must be >= 1");
  if (factor == 1) return values;
  std::vector<double> out;
  out.reserve((values.size() + factor - 1) / factor);
  for (std::size_t i = 0; i < values.size(); i += factor) {
    const std::size_t end = std::min(values.size(), i + factor);
    double s = 0.0;
    for (std::size_t k = i; k < end; ++k) s += values[k];
    out.push_back(s / static_cast<double>(end - i));
  }
  return out;
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("pearson: series lengths differ");
  if (x.empty()) throw DomainError("pearson: empty series");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return {0.0, false};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), true};
}

Correlation correlate(const FeatureSequence& features, const std::vector<double>& binned_truth) {
  return pearson(features.values, binned_truth);
}

namespace {

bool overlaps(std::size_t w, double window_us, const scenarios::BurstAnnotation& a) {
  const double lo = static_cast<double>(w) * window_us;
  const double hi = lo + window_us;
  return static_cast<double>(a.start_us) < hi && static_cast<double>(a.end_us) >= lo;
}

}  // namespace

IdleBaseline idle_baseline(const FeatureSequence& features,
                           const std::vector<scenarios::BurstAnnotation>& annotations) {
  const double window_us = features.window_ms * 1000.0;
  std::vector<bool> busy(features.values.size(), false);
  for (const auto& a : annotations) {
    const auto first = static_cast<std::size_t>(std::max<std::int64_t>(0, a.start_us) / window_us);
    for (std::size_t w = first; w < busy.size() && overlaps(w, window_us, a); ++w) busy[w] = true;
  }
  std::vector<double> idle;
  for (std::size_t w = 0; w < busy.size(); ++w) {
    if (!busy[w]) idle.push_back(features.values[w]);
  }
  if (idle.empty()) throw DomainError("idle_baseline: no idle windows outside the annotations");
  return {median(idle), median_abs_deviation(idle)};
}

std::vector<SizeDetection> detect_bursts(const FeatureSequence& features,
                                         const std::vector<scenarios::BurstAnnotation>& annotations,
                                         double baseline_ms, double threshold_ms) {
  const double window_us = features.window_ms * 1000.0;
  std::vector<SizeDetection> out;
  std::map<std::int64_t, std::size_t> slot;
  for (const auto& a : annotations) {
    auto [it, inserted] = slot.try_emplace(a.size_bytes, out.size());
    if (inserted) out.push_back({a.size_bytes, 0, 0});
    auto& d = out[it->second];
    ++d.repeats;
    const auto first = static_cast<std::size_t>(std::max<std::int64_t>(0, a.start_us) / window_us);
    for (std::size_t w = first; w < features.values.size() && overlaps(w, window_us, a); ++w) {
      if (features.values[w] > baseline_ms + threshold_ms) {
        ++d.detected;
        break;
      }
    }
  }
  return out;
}

}  // namespace hublab::web
