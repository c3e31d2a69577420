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

#include "hublab/scenarios/web_traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"
#include "hublab/scenarios/typist.hpp"

namespace hublab::scenarios {
namespace {

std::int64_t ms_to_us(double ms) { return std::llround(ms * 1000.0); }

}  // namespace

std::int64_t emit_burst(std::int64_t t_us, std::int64_t bytes, const TransferPacing& pacing,
                        std::vector<sim::TrafficPoint>& out, Rng* jitter_rng) {
  if (bytes <= 0) return t_us;
  if (pacing.mss_bytes <= 0) {
    out.push_back({t_us, bytes});
    return t_us;
  }
  std::int64_t remaining = bytes;
  std::int64_t cwnd = std::max(pacing.initial_window_bytes, pacing.mss_bytes);
  double round_start = static_cast<double>(t_us);
  std::int64_t last = t_us;
  while (remaining > 0) {
    const std::int64_t round_bytes = std::min(cwnd, remaining);
    const std::int64_t packets = (round_bytes + pacing.mss_bytes - 1) / pacing.mss_bytes;
    double span = static_cast<double>(pacing.rtt_us);
    if (pacing.link_bytes_per_us > 0.0) {
      span = std::max(span, static_cast<double>(round_bytes) / pacing.link_bytes_per_us);
    }
    const double spacing = span / static_cast<double>(packets);
    std::int64_t left = round_bytes;
    for (std::int64_t k = 0; k < packets; ++k) {
      const std::int64_t size = std::min(left, pacing.mss_bytes);
      std::int64_t t = std::llround(round_start + spacing * static_cast<double>(k));
      if (jitter_rng && pacing.packet_jitter_us > 0) {
        t = std::max(t_us, t + jitter_rng->between(-pacing.packet_jitter_us, pacing.packet_jitter_us));
      }
      last = std::max(last, t);
      out.push_back({t, size});
      left -= size;
    }
    remaining -= round_bytes;
    round_start += span;
    cwnd *= 2;
  }
  return last;
}

void SiteProfile::validate() const {
  if (label.empty()) throw ConfigError("site profile needs a label");
  for (const auto& b : bursts) {
    if (b.size_bytes <= 0) throw ConfigError("site " + label + ": burst sizes must be > 0");
    if (b.offset_ms < 0.0 || b.offset_jitter_ms < 0.0 || b.size_cv < 0.0) {
      throw ConfigError("site " + label + ": negative burst offset/jitter/cv");
    }
    if (!(b.probability >= 0.0 && b.probability <= 1.0)) {
      throw ConfigError("site " + label + ": burst probability outside [0,1]");
    }
  }
  if (total_bytes_min < 0 || (total_bytes_max > 0 && total_bytes_max < total_bytes_min)) {
    throw ConfigError("site " + label + ": bad total byte range");
  }
}

std::int64_t SiteProfile::nominal_bytes() const {
  double total = 0.0;
  for (const auto& b : bursts) total += b.probability * static_cast<double>(b.size_bytes);
  return std::llround(total);
}

sim::TrafficTimeline gen_web_traffic(const SiteProfile& site, std::int64_t duration_us,
                                     std::uint64_t seed) {
  site.validate();
  Rng rng(seed);
  struct Drawn {
    std::int64_t t_us;
    double bytes;
  };
  std::vector<Drawn> drawn;
  double total = 0.0;
  for (const auto& b : site.bursts) {
    // Draw every variate unconditionally so one burst's outcome does not
    // shift the stream for the rest.
    const bool present = rng.bernoulli(b.probability);
    const double jitter = rng.uniform(-b.offset_jitter_ms, b.offset_jitter_ms);
    const double size = sample_lognormal(static_cast<double>(b.size_bytes),
                                         b.size_cv * static_cast<double>(b.size_bytes), rng);
    if (!present) continue;
    drawn.push_back({ms_to_us(std::max(0.0, b.offset_ms + jitter)), size});
    total += size;
  }
  double scale = 1.0;
  if (total > 0.0) {
    if (site.total_bytes_max > 0 && total > static_cast<double>(site.total_bytes_max)) {
      scale = static_cast<double>(site.total_bytes_max) / total;
    } else if (total < static_cast<double>(site.total_bytes_min)) {
      scale = static_cast<double>(site.total_bytes_min) / total;
    }
  }
  std::vector<sim::TrafficPoint> points;
  for (const auto& d : drawn) {
    const auto bytes = std::max<std::int64_t>(1, std::llround(d.bytes * scale));
    emit_burst(d.t_us, bytes, site.pacing, points, &rng);
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.t_us < b.t_us; });
  sim::TrafficTimeline out;
  for (const auto& p : points) {
    if (p.t_us < duration_us) out.points.push_back(p);
  }
  return out;
}

std::vector<SiteProfile> generate_site_corpus(std::size_t count, std::uint64_t seed,
                                              const SiteCorpusParams& params) {
  if (params.min_bursts < 1 || params.max_bursts < params.min_bursts ||
      params.min_burst_bytes < 1 || params.max_burst_bytes < params.min_burst_bytes ||
      params.browse_end_ms < params.browse_start_ms) {
    throw ConfigError("site corpus parameters are inconsistent");
  }
  std::vector<SiteProfile> sites;
  sites.reserve(count);
  const double log_lo = std::log(static_cast<double>(params.min_burst_bytes));
  const double log_hi = std::log(static_cast<double>(params.max_burst_bytes));
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, streams::kSites, i));
    SiteProfile s;
    char label[32];
    std::snprintf(label, sizeof label, "site-%03zu", i);
    s.label = label;
    s.pacing = params.pacing;
    const auto n = rng.between(params.min_bursts, params.max_bursts);
    for (std::int64_t k = 0; k < n; ++k) {
      BurstTemplate b;
      // The first burst is the main document right after navigation.
      b.offset_ms = k == 0 ? params.browse_start_ms + rng.uniform(0.0, 50.0)
                           : rng.uniform(params.browse_start_ms, params.browse_end_ms);
      b.offset_jitter_ms = params.offset_jitter_ms;
      b.size_bytes = std::llround(std::exp(rng.uniform(log_lo, log_hi)));
      b.size_cv = params.size_cv;
      b.probability = k == 0 ? 1.0 : params.optional_burst_probability;
      s.bursts.push_back(b);
    }
    std::sort(s.bursts.begin(), s.bursts.end(),
              [](const auto& a, const auto& b) { return a.offset_ms < b.offset_ms; });
    const double nominal = static_cast<double>(s.nominal_bytes());
    s.total_bytes_min = std::llround(nominal * (1.0 - params.total_slack));
    s.total_bytes_max = std::llround(nominal * (1.0 + params.total_slack));
    sites.push_back(std::move(s));
  }
  return sites;
}

sim::TrafficTimeline vpn_transform(const sim::TrafficTimeline& timeline, const VpnParams& params,
                                   std::uint64_t seed) {
  if (params.per_packet_overhead_bytes < 0 || params.added_latency_ms < 0.0 || params.jitter_ms < 0.0) {
    throw DomainError("VPN parameters must be >= 0");
  }
  Rng rng(seed);
  sim::TrafficTimeline out;
  out.points.reserve(timeline.points.size());
  const std::int64_t latency = ms_to_us(params.added_latency_ms);
  for (const auto& p : timeline.points) {
    const std::int64_t jitter = params.jitter_ms > 0.0 ? ms_to_us(rng.uniform(0.0, params.jitter_ms)) : 0;
    out.points.push_back({p.t_us + latency + jitter, p.bytes + params.per_packet_overhead_bytes});
  }
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const auto& a, const auto& b) { return a.t_us < b.t_us; });
  return out;
}

BurstSweep burst_sweep_workload(const std::vector<std::int64_t>& sizes, std::int64_t repeats,
                                double gap_ms, const TransferPacing& pacing, std::uint64_t seed,
                                double start_ms, double margin_ms) {
  if (sizes.empty()) throw DomainError("burst sweep needs at least one size");
  if (repeats < 1 || !(gap_ms > 0.0)) throw DomainError("burst sweep needs repeats >= 1 and gap > 0");
  BurstSweep sweep;
  Rng rng(seed);
  std::int64_t t = ms_to_us(start_ms);
  const std::int64_t gap = ms_to_us(gap_ms);
  const std::int64_t margin = ms_to_us(margin_ms);
  for (const auto size : sizes) {
    if (size <= 0) throw DomainError("burst sizes must be > 0");
    for (std::int64_t r = 0; r < repeats; ++r) {
      const std::int64_t last = emit_burst(t, size, pacing, sweep.timeline.points, &rng);
      sweep.annotations.push_back({size, r, t, last + margin});
      t += gap;
    }
  }
  std::stable_sort(sweep.timeline.points.begin(), sweep.timeline.points.end(),
                   [](const auto& a, const auto& b) { return a.t_us < b.t_us; });
  sweep.duration_us = std::max(t, sweep.annotations.back().end_us + gap);
  return sweep;
}

std::vector<std::int64_t> default_sweep_sizes() {
  std::vector<std::int64_t> sizes;
  for (std::int64_t s = 16; s <= 4 * 1024 * 1024; s *= 2) sizes.push_back(s);
  return sizes;
}

void to_json(nlohmann::json& j, const TransferPacing& p) {
  j = nlohmann::json{{"mss_bytes", p.mss_bytes},
                     {"initial_window_bytes", p.initial_window_bytes},
                     {"rtt_us", p.rtt_us},
                     {"link_bytes_per_us", p.link_bytes_per_us},
                     {"packet_jitter_us", p.packet_jitter_us}};
}

void from_json(const nlohmann::json& j, TransferPacing& p) {
  p.mss_bytes = j.value("mss_bytes", p.mss_bytes);
  p.initial_window_bytes = j.value("initial_window_bytes", p.initial_window_bytes);
  p.rtt_us = j.value("rtt_us", p.rtt_us);
  p.link_bytes_per_us = j.value("link_bytes_per_us", p.link_bytes_per_us);
  p.packet_jitter_us = j.value("packet_jitter_us", p.packet_jitter_us);
}

void to_json(nlohmann::json& j, const BurstTemplate& b) {
  j = nlohmann::json{{"offset_ms", b.offset_ms},   {"offset_jitter_ms", b.offset_jitter_ms},
                     {"size_bytes", b.size_bytes}, {"size_cv", b.size_cv},
                     {"probability", b.probability}};
}

void from_json(const nlohmann::json& j, BurstTemplate& b) {
  b = BurstTemplate{};
  j.at("offset_ms").get_to(b.offset_ms);
  j.at("size_bytes").get_to(b.size_bytes);
  b.offset_jitter_ms = j.value("offset_jitter_ms", 0.0);
  b.size_cv = j.value("size_cv", 0.0);
  b.probability = j.value("probability", 1.0);
}

void to_json(nlohmann::json& j, const SiteProfile& s) {
  j = nlohmann::json{{"label", s.label},
                     {"bursts", s.bursts},
                     {"total_bytes_min", s.total_bytes_min},
                     {"total_bytes_max", s.total_bytes_max},
                     {"pacing", s.pacing}};
}

void from_json(const nlohmann::json& j, SiteProfile& s) {
  s = SiteProfile{};
  j.at("label").get_to(s.label);
  j.at("bursts").get_to(s.bursts);
  s.total_bytes_min = j.value("total_bytes_min", std::int64_t{0});
  s.total_bytes_max = j.value("total_bytes_max", std::int64_t{0});
  if (j.contains("pacing")) j.at("pacing").get_to(s.pacing);
  s.validate();
}

void to_json(nlohmann::json& j, const SiteCorpusParams& p) {
  j = nlohmann::json{{"min_bursts", p.min_bursts},
                     {"max_bursts", p.max_bursts},
                     {"browse_start_ms", p.browse_start_ms},
                     {"browse_end_ms", p.browse_end_ms},
                     {"min_burst_bytes", p.min_burst_bytes},
                     {"max_burst_bytes", p.max_burst_bytes},
                     {"offset_jitter_ms", p.offset_jitter_ms},
                     {"size_cv", p.size_cv},
                     {"optional_burst_probability", p.optional_burst_probability},
                     {"total_slack", p.total_slack},
                     {"pacing", p.pacing}};
}

void from_json(const nlohmann::json& j, SiteCorpusParams& p) {
  p = SiteCorpusParams{};
  p.min_bursts = j.value("min_bursts", p.min_bursts);
  p.max_bursts = j.value("max_bursts", p.max_bursts);
  p.browse_start_ms = j.value("browse_start_ms", p.browse_start_ms);
  p.browse_end_ms = j.value("browse_end_ms", p.browse_end_ms);
  p.min_burst_bytes = j.value("min_burst_bytes", p.min_burst_bytes);
  p.max_burst_bytes = j.value("max_burst_bytes", p.max_burst_bytes);
  p.offset_jitter_ms = j.value("offset_jitter_ms", p.offset_jitter_ms);
  p.size_cv = j.value("size_cv", p.size_cv);
  p.optional_burst_probability = j.value("optional_burst_probability", p.optional_burst_probability);
  p.total_slack = j.value("total_slack", p.total_slack);
  if (j.contains("pacing")) j.at("pacing").get_to(p.pacing);
}

void to_json(nlohmann::json& j, const VpnParams& p) {
  j = nlohmann::json{{"per_packet_overhead_bytes", p.per_packet_overhead_bytes},
                     {"added_latency_ms", p.added_latency_ms},
                     {"jitter_ms", p.jitter_ms}};
}

void from_json(const nlohmann::json& j, VpnParams& p) {
  p = VpnParams{};
  p.per_packet_overhead_bytes = j.value("per_packet_overhead_bytes", std::int64_t{0});
  p.added_latency_ms = j.value("added_latency_ms", 0.0);
  p.jitter_ms = j.value("jitter_ms", 0.0);
}

}  // namespace hublab::scenarios
