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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hublab/keystroke/detector.hpp"
#include "hublab/keystroke/hmm.hpp"
#include "hublab/scenarios/sanitize.hpp"
#include "hublab/scenarios/typist.hpp"
#include "hublab/scenarios/web_traffic.hpp"
#include "hublab/sim/workload.hpp"
#include "hublab/usb/hub_config.hpp"
#include "hublab/web/bilstm.hpp"
#include "hublab/web/dataset.hpp"

namespace hublab::experiment {

enum class Scenario { keystroke, website, resolution, mitigation };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view s);  // throws ConfigError

struct KeystrokeSettings {
  std::string alphabet = "etaoinshrd";
  std::size_t dictionary_size = 1000;
  /// Word list to use instead of a generated dictionary. The alphabet is
  /// then taken from the words.
  std::string dictionary_file;
  std::size_t profiling_words = 3000;
  /// Distinct attack draws; each is typed trials_per_word times.
  std::size_t attack_words = 1000;
  std::size_t trials_per_word = 1;
  /// Simulated idle time after the last key event.
  double tail_ms = 500.0;
  scenarios::TypistCalibration typist;
  keystroke::DetectorConfig detector;
  keystroke::HmmFitConfig hmm;
  std::vector<std::size_t> ks{10, 50};
  bool save_profiling_traces = false;
};

struct WebsiteSettings {
  std::size_t sites = 20;
  std::size_t traces_per_site = 30;
  double duration_ms = 8000.0;
  double window_ms = 5.0;
  scenarios::SiteCorpusParams corpus;
  std::optional<scenarios::VpnParams> vpn;
  web::DatasetShape shape{1600, 16};
  std::size_t folds = 5;
  web::TrainConfig train{32, 60, 0.3, 16, 5.0, web::Optimizer::sgd, 1};
};

struct SweepSettings {
  std::vector<std::int64_t> sizes = scenarios::default_sweep_sizes();
  std::int64_t repeats = 5;
  double gap_ms = 1000.0;
  double window_ms = 5.0;
  /// Detection threshold above the idle baseline, in idle MADs.
  double mad_multiplier = 3.0;
  scenarios::TransferPacing pacing;
};

/// Runs a keystroke and a website workload under each policy. Typist,
/// detector and site corpus settings come from the keystroke and website
/// blocks.
struct MitigationSettings {
  std::vector<usb::ArbitrationKind> policies{usb::ArbitrationKind::fair_round_robin,
                                             usb::ArbitrationKind::randomized_allocation};
  std::size_t keystroke_words = 100;
  std::size_t traces_per_site = 1;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::keystroke;
  usb::HubConfig hub;
  sim::NoiseModel noise;
  sim::ClosedLoopReader spy;
  sim::NicAggregation nic;
  std::uint64_t seed = 1;
  /// Concurrent trial jobs. Output does not depend on it.
  std::size_t workers = 1;
  std::string output_dir = "runs/default";
  bool save_traces = true;
  bool sanitize = true;
  scenarios::SanitizeConfig sanitize_config;
  KeystrokeSettings keystroke;
  WebsiteSettings website;
  SweepSettings sweep;
  MitigationSettings mitigation;

  /// Throws ConfigError.
  void validate() const;
  /// FNV-1a of the canonical JSON without output_dir and workers.
  std::string digest() const;
};

/// Canonical JSON. output_dir and workers are left out when `portable`.
nlohmann::json to_json(const ExperimentConfig& c, bool portable = false);
/// Missing keys keep their defaults; unknown keys are rejected with
/// ConfigError naming the key path.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace hublab::experiment

namespace hublab::usb {
void to_json(nlohmann::json& j, const HubConfig& h);
void from_json(const nlohmann::json& j, HubConfig& h);
}  // namespace hublab::usb

namespace hublab::keystroke {
void to_json(nlohmann::json& j, const DetectorConfig& c);
void from_json(const nlohmann::json& j, DetectorConfig& c);
void to_json(nlohmann::json& j, const HmmFitConfig& c);
void from_json(const nlohmann::json& j, HmmFitConfig& c);
}  // namespace hublab::keystroke

namespace hublab::web {
void to_json(nlohmann::json& j, const DatasetShape& s);
void from_json(const nlohmann::json& j, DatasetShape& s);
}  // namespace hublab::web
