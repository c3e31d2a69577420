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

#include "hublab/scenarios/sanitize.hpp"

#include <map>

#include "hublab/common/error.hpp"
#include "hublab/common/stats.hpp"

namespace hublab::scenarios {

TraceSummary TraceSummary::of(const sim::SpyTrace& spy) {
  TraceSummary t;
  t.scenario = spy.meta.scenario;
  t.records = spy.records.size();
  const auto delays = spy.delays_us();
  if (!delays.empty()) {
    t.median_delay_us = median(delays);
    t.delay_stddev_us = stddev(delays);
  }
  return t;
}

SanitizeResult sanitize_summaries(std::span<const TraceSummary> dataset, const SanitizeConfig& cfg) {
  if (dataset.empty()) throw DomainError("sanitize_traces: empty dataset");

  struct ScenarioStats {
    std::vector<double> lengths;
    std::vector<double> median_delays;
  };
  std::map<std::string, ScenarioStats> by_scenario;
  for (const auto& t : dataset) {
    auto& s = by_scenario[t.scenario];
    s.lengths.push_back(static_cast<double>(t.records));
    if (t.records > 0) s.median_delays.push_back(t.median_delay_us);
  }
  std::map<std::string, std::pair<double, double>> limits;  // min length, sd floor
  for (auto& [name, s] : by_scenario) {
    const double len = median(s.lengths);
    const double med_delay = s.median_delays.empty() ? 0.0 : median(s.median_delays);
    limits[name] = {cfg.min_length_fraction * len, cfg.stddev_floor_fraction * med_delay};
  }

  SanitizeResult out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& t = dataset[i];
    const auto [min_len, sd_floor] = limits.at(t.scenario);
    if (static_cast<double>(t.records) < min_len) {
      out.rejected.push_back({i, "short",
                              std::to_string(t.records) + " records, scenario minimum " + format_double(min_len)});
    } else if (t.delay_stddev_us < sd_floor || t.records < 2) {
      out.rejected.push_back({i, "no deviation",
                              "delay stddev " + format_double(t.delay_stddev_us) + " us below floor " +
                                  format_double(sd_floor) + " us"});
    } else {
      out.kept.push_back(i);
    }
  }
  return out;
}

SanitizeResult sanitize_traces(std::span<const sim::TraceBundle> dataset, const SanitizeConfig& cfg) {
  std::vector<TraceSummary> s;
  s.reserve(dataset.size());
  for (const auto& b : dataset) s.push_back(TraceSummary::of(b.spy));
  return sanitize_summaries(s, cfg);
}

}  // namespace hublab::scenarios
