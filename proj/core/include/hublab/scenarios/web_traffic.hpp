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
#include <vector>

#include <nlohmann/json.hpp>

#include "hublab/common/rng.hpp"
#include "hublab/sim/trace.hpp"

namespace hublab::scenarios {

/// How a burst is spread over time on the victim's link: slow-start rounds of
/// MSS-sized packets. Each round carries cwnd bytes (doubling per round),
/// spread evenly over max(RTT, bytes / link rate). mss_bytes = 0 disables
/// pacing and emits every burst as a single timeline point.
struct TransferPacing {
  std::int64_t mss_bytes = 1460;
  std::int64_t initial_window_bytes = 14600;
  std::int64_t rtt_us = 10000;
  double link_bytes_per_us = 12.5;  // 100 Mb/s
  /// Network jitter: each packet moves by a uniform draw in
  /// [-packet_jitter_us, +packet_jitter_us] (never before the burst start).
  std::int64_t packet_jitter_us = 135;

  friend bool operator==(const TransferPacing&, const TransferPacing&) = default;
};

/// Appends the paced packets of one burst starting at t_us; returns the time
/// of its last packet.
std::int64_t emit_burst(std::int64_t t_us, std::int64_t bytes, const TransferPacing& pacing,
                        std::vector<sim::TrafficPoint>& out, Rng* jitter_rng = nullptr);

struct BurstTemplate {
  double offset_ms = 0.0;
  double offset_jitter_ms = 0.0;  // uniform +/- jitter per visit
  std::int64_t size_bytes = 0;
  double size_cv = 0.0;           // log-normal spread of the size per visit
  double probability = 1.0;       // chance the burst occurs on a visit

  friend bool operator==(const BurstTemplate&, const BurstTemplate&) = default;
};

struct SiteProfile {
  std::string label;
  std::vector<BurstTemplate> bursts;
  /// Visit totals are rescaled into this range; max 0 means unbounded.
  std::int64_t total_bytes_min = 0;
  std::int64_t total_bytes_max = 0;
  TransferPacing pacing{0, 0, 0, 0.0, 0};

  void validate() const;  // throws ConfigError
  /// Expected bytes of one visit ignoring variability.
  std::int64_t nominal_bytes() const;

  friend bool operator==(const SiteProfile&, const SiteProfile&) = default;
};

/// One page visit. Points at or past duration_us are dropped.
sim::TrafficTimeline gen_web_traffic(const SiteProfile& site, std::int64_t duration_us,
                                     std::uint64_t seed);

struct SiteCorpusParams {
  std::int64_t min_bursts = 3;
  std::int64_t max_bursts = 10;
  double browse_start_ms = 1000.0;
  double browse_end_ms = 6000.0;
  std::int64_t min_burst_bytes = 128 * 1024;
  std::int64_t max_burst_bytes = 4 * 1024 * 1024;
  double offset_jitter_ms = 30.0;
  double size_cv = 0.15;
  double optional_burst_probability = 0.9;
  double total_slack = 0.3;  // total range = nominal * (1 -/+ slack)
  TransferPacing pacing;

  friend bool operator==(const SiteCorpusParams&, const SiteCorpusParams&) = default;
};

/// `count` template-generated sites labelled site-000, site-001, ...
/// Site i depends only on (seed, i).
std::vector<SiteProfile> generate_site_corpus(std::size_t count, std::uint64_t seed,
                                              const SiteCorpusParams& params = {});

struct VpnParams {
  std::int64_t per_packet_overhead_bytes = 0;
  double added_latency_ms = 0.0;
  double jitter_ms = 0.0;

  friend bool operator==(const VpnParams&, const VpnParams&) = default;
};

/// Adds per-point overhead and a latency + uniform [0, jitter] shift, then
/// restores time order. Point count is preserved.
sim::TrafficTimeline vpn_transform(const sim::TrafficTimeline& timeline, const VpnParams& params,
                                   std::uint64_t seed);

struct BurstAnnotation {
  std::int64_t size_bytes = 0;
  std::int64_t repeat = 0;
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;  // last packet + margin

  friend bool operator==(const BurstAnnotation&, const BurstAnnotation&) = default;
};

struct BurstSweep {
  sim::TrafficTimeline timeline;
  std::vector<BurstAnnotation> annotations;
  std::int64_t duration_us = 0;  // covers the last annotation plus one gap
};

/// Every size sent `repeats` times, bursts starting gap_ms apart.
BurstSweep burst_sweep_workload(const std::vector<std::int64_t>& sizes, std::int64_t repeats,
                                double gap_ms, const TransferPacing& pacing = {},
                                std::uint64_t seed = 0, double start_ms = 1000.0,
                                double margin_ms = 10.0);

/// 16 B, 32 B, ..., 4 MiB.
std::vector<std::int64_t> default_sweep_sizes();

void to_json(nlohmann::json& j, const TransferPacing& p);
void from_json(const nlohmann::json& j, TransferPacing& p);
void to_json(nlohmann::json& j, const BurstTemplate& b);
void from_json(const nlohmann::json& j, BurstTemplate& b);
void to_json(nlohmann::json& j, const SiteProfile& s);
void from_json(const nlohmann::json& j, SiteProfile& s);
void to_json(nlohmann::json& j, const SiteCorpusParams& p);
void from_json(const nlohmann::json& j, SiteCorpusParams& p);
void to_json(nlohmann::json& j, const VpnParams& p);
void from_json(const nlohmann::json& j, VpnParams& p);

}  // namespace hublab::scenarios
