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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hublab/common/rng.hpp"
#include "hublab/sim/trace.hpp"

namespace hublab::scenarios {

/// Mean and standard deviation of a positive latency, in ms. Samples are
/// log-normal with these first two moments; stddev 0 returns the mean.
struct LatencyParams {
  double mean_ms = 0.0;
  double stddev_ms = 0.0;

  friend bool operator==(const LatencyParams&, const LatencyParams&) = default;
};

/// Log-normal draw with the given mean and standard deviation.
double sample_lognormal(double mean, double stddev, Rng& rng);
inline double sample_lognormal_ms(const LatencyParams& p, Rng& rng) {
  return sample_lognormal(p.mean_ms, p.stddev_ms, rng);
}

struct TypistProfile {
  std::string alphabet;
  /// Dense alphabet x alphabet table, row = first char.
  std::vector<LatencyParams> digram_latency;
  LatencyParams hold_time{95.0, 20.0};
  /// Probability that a typed word contains one overlapping keystroke
  /// (next press before the previous release).
  double overlap_rate = 0.0;
  /// press(next) -> release(previous) gap when overlapping.
  LatencyParams overlap_gap{14.0, 6.0};
  /// Minimum spacing kept between any two key events.
  double min_event_gap_ms = 4.0;
  /// Time of the first press.
  double start_ms = 1000.0;

  std::size_t index_of(char c) const;  // throws DomainError
  const LatencyParams& digram(char a, char b) const;
  LatencyParams& digram(char a, char b);

  /// Throws ConfigError if any invariant is violated.
  void validate() const;

  friend bool operator==(const TypistProfile&, const TypistProfile&) = default;
};

/// Knobs for synthesizing a typist: digram means uniform in
/// [latency_min_ms, latency_max_ms], stddev = latency_cv * mean.
struct TypistCalibration {
  double latency_min_ms = 200.0;
  double latency_max_ms = 450.0;
  double latency_cv = 0.18;
  LatencyParams hold_time{95.0, 20.0};
  double overlap_rate = 0.104;
  LatencyParams overlap_gap{14.0, 6.0};

  friend bool operator==(const TypistCalibration&, const TypistCalibration&) = default;
};

TypistProfile make_typist_profile(std::string_view alphabet, const TypistCalibration& cal,
                                  std::uint64_t seed);

/// Simulated typist: 2*|word| events sorted by time. Press-to-press intervals
/// follow the digram table. With probability overlap_rate one randomly chosen
/// keystroke is released only after the next press.
sim::KeyEventTrace gen_typist_events(std::string_view word, const TypistProfile& profile,
                                     std::uint64_t seed);

void to_json(nlohmann::json& j, const LatencyParams& p);
void from_json(const nlohmann::json& j, LatencyParams& p);
void to_json(nlohmann::json& j, const TypistProfile& p);
void from_json(const nlohmann::json& j, TypistProfile& p);
void to_json(nlohmann::json& j, const TypistCalibration& c);
void from_json(const nlohmann::json& j, TypistCalibration& c);

}  // namespace hublab::scenarios
