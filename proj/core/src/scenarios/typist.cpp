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

#include "hublab/scenarios/typist.hpp"

#include <algorithm>
#include <cmath>

#include "hublab/common/error.hpp"

namespace hublab::scenarios {
namespace {

std::int64_t ms_to_us(double ms) { return std::llround(ms * 1000.0); }

}  // namespace

double sample_lognormal(double mean, double stddev, Rng& rng) {
  if (stddev <= 0.0) return mean;
  const double cv = stddev / mean;
  const double sigma2 = std::log1p(cv * cv);
  const double mu = std::log(mean) - 0.5 * sigma2;
  return std::exp(mu + std::sqrt(sigma2) * rng.normal());
}

std::size_t TypistProfile::index_of(char c) const {
  const auto pos = alphabet.find(c);
  if (pos == std::string::npos) {
    throw DomainError(std::string("character '") + c + "' is not in the typist alphabet");
  }
  return pos;
}

const LatencyParams& TypistProfile::digram(char a, char b) const {
  return digram_latency.at(index_of(a) * alphabet.size() + index_of(b));
}

LatencyParams& TypistProfile::digram(char a, char b) {
  return digram_latency.at(index_of(a) * alphabet.size() + index_of(b));
}

void TypistProfile::validate() const {
  if (alphabet.empty()) throw ConfigError("typist alphabet is empty");
  std::string sorted = alphabet;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("typist alphabet has repeated characters");
  }
  if (digram_latency.size() != alphabet.size() * alphabet.size()) {
    throw ConfigError("digram table must cover alphabet x alphabet");
  }
  auto check = [](const LatencyParams& p, const char* what) {
    if (!(p.mean_ms > 0.0) || !(p.stddev_ms >= 0.0)) {
      throw ConfigError(std::string(what) + ": mean must be > 0 and stddev >= 0");
    }
  };
  for (const auto& d : digram_latency) check(d, "digram latency");
  check(hold_time, "hold time");
  check(overlap_gap, "overlap gap");
  if (!(overlap_rate >= 0.0 && overlap_rate <= 1.0)) throw ConfigError("overlap_rate must be in [0,1]");
  if (!(min_event_gap_ms > 0.0)) throw ConfigError("min_event_gap_ms must be > 0");
  if (!(start_ms >= 0.0)) throw ConfigError("start_ms must be >= 0");
}

TypistProfile make_typist_profile(std::string_view alphabet, const TypistCalibration& cal,
                                  std::uint64_t seed) {
  if (!(cal.latency_min_ms > 0.0) || cal.latency_max_ms < cal.latency_min_ms || cal.latency_cv < 0.0) {
    throw ConfigError("typist calibration: need 0 < latency_min_ms <= latency_max_ms, cv >= 0");
  }
  TypistProfile p;
  p.alphabet = alphabet;
  p.hold_time = cal.hold_time;
  p.overlap_rate = cal.overlap_rate;
  p.overlap_gap = cal.overlap_gap;
  Rng rng(seed);
  p.digram_latency.resize(alphabet.size() * alphabet.size());
  for (auto& d : p.digram_latency) {
    d.mean_ms = rng.uniform(cal.latency_min_ms, cal.latency_max_ms);
    d.stddev_ms = cal.latency_cv * d.mean_ms;
  }
  p.validate();
  return p;
}

sim::KeyEventTrace gen_typist_events(std::string_view word, const TypistProfile& profile,
                                     std::uint64_t seed) {
  for (char c : word) profile.index_of(c);
  const std::size_t n = word.size();
  sim::KeyEventTrace out;
  out.word = word;
  if (n == 0) return out;

  Rng rng(seed);
  const std::int64_t gap = ms_to_us(profile.min_event_gap_ms);

  std::vector<std::int64_t> press(n), release(n);
  press[0] = ms_to_us(profile.start_ms);
  for (std::size_t i = 1; i < n; ++i) {
    const double l = sample_lognormal_ms(profile.digram(word[i - 1], word[i]), rng);
    press[i] = press[i - 1] + std::max(ms_to_us(l), 4 * gap);
  }

  std::size_t overlapped = n;  // none
  if (n >= 2 && rng.bernoulli(profile.overlap_rate)) overlapped = rng.below(n - 1);

  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t hold = ms_to_us(sample_lognormal_ms(profile.hold_time, rng));
    const std::int64_t lo = press[i] + (i == overlapped + 1 ? 3 * gap : gap);
    std::int64_t r = std::max(press[i] + hold, lo);
    if (i + 1 < n) r = std::min(r, press[i + 1] - gap);
    release[i] = r;
  }
  if (overlapped < n) {
    const std::size_t j = overlapped;
    const std::int64_t g = ms_to_us(sample_lognormal_ms(profile.overlap_gap, rng));
    const std::int64_t hi = release[j + 1] - gap - press[j + 1];
    release[j] = press[j + 1] + std::clamp(g, gap, hi);
  }

  out.events.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.events.push_back({press[i], sim::KeyAction::press, word[i]});
    out.events.push_back({release[i], sim::KeyAction::release, word[i]});
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const auto& a, const auto& b) { return a.t_us < b.t_us; });
  return out;
}

void to_json(nlohmann::json& j, const LatencyParams& p) {
  j = nlohmann::json{{"mean_ms", p.mean_ms}, {"stddev_ms", p.stddev_ms}};
}

void from_json(const nlohmann::json& j, LatencyParams& p) {
  j.at("mean_ms").get_to(p.mean_ms);
  j.at("stddev_ms").get_to(p.stddev_ms);
}

void to_json(nlohmann::json& j, const TypistProfile& p) {
  nlohmann::json digrams = nlohmann::json::object();
  for (char a : p.alphabet) {
    for (char b : p.alphabet) {
      const auto& d = p.digram(a, b);
      digrams[std::string{a, b}] = nlohmann::json::array({d.mean_ms, d.stddev_ms});
    }
  }
  j = nlohmann::json{{"alphabet", p.alphabet},
                     {"digram_latency", digrams},
                     {"hold_time", p.hold_time},
                     {"overlap_rate", p.overlap_rate},
                     {"overlap_gap", p.overlap_gap},
                     {"min_event_gap_ms", p.min_event_gap_ms},
                     {"start_ms", p.start_ms}};
}

void from_json(const nlohmann::json& j, TypistProfile& p) {
  p = TypistProfile{};
  j.at("alphabet").get_to(p.alphabet);
  p.digram_latency.assign(p.alphabet.size() * p.alphabet.size(), LatencyParams{});
  const auto& digrams = j.at("digram_latency");
  for (char a : p.alphabet) {
    for (char b : p.alphabet) {
      const std::string key{a, b};
      if (!digrams.contains(key)) throw ConfigError("typist profile is missing digram " + key);
      const auto& v = digrams.at(key);
      p.digram(a, b) = {v.at(0).get<double>(), v.at(1).get<double>()};
    }
  }
  if (j.contains("hold_time")) j.at("hold_time").get_to(p.hold_time);
  if (j.contains("overlap_rate")) j.at("overlap_rate").get_to(p.overlap_rate);
  if (j.contains("overlap_gap")) j.at("overlap_gap").get_to(p.overlap_gap);
  if (j.contains("min_event_gap_ms")) j.at("min_event_gap_ms").get_to(p.min_event_gap_ms);
  if (j.contains("start_ms")) j.at("start_ms").get_to(p.start_ms);
  p.validate();
}

void to_json(nlohmann::json& j, const TypistCalibration& c) {
  j = nlohmann::json{{"latency_min_ms", c.latency_min_ms}, {"latency_max_ms", c.latency_max_ms},
                     {"latency_cv", c.latency_cv},         {"hold_time", c.hold_time},
                     {"overlap_rate", c.overlap_rate},     {"overlap_gap", c.overlap_gap}};
}

void from_json(const nlohmann::json& j, TypistCalibration& c) {
  c = TypistCalibration{};
  if (j.contains("latency_min_ms")) j.at("latency_min_ms").get_to(c.latency_min_ms);
  if (j.contains("latency_max_ms")) j.at("latency_max_ms").get_to(c.latency_max_ms);
  if (j.contains("latency_cv")) j.at("latency_cv").get_to(c.latency_cv);
  if (j.contains("hold_time")) j.at("hold_time").get_to(c.hold_time);
  if (j.contains("overlap_rate")) j.at("overlap_rate").get_to(c.overlap_rate);
  if (j.contains("overlap_gap")) j.at("overlap_gap").get_to(c.overlap_gap);
}

}  // namespace hublab::scenarios
