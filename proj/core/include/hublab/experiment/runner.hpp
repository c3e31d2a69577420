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
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hublab/experiment/config.hpp"
#include "hublab/keystroke/detector.hpp"
#include "hublab/keystroke/hmm.hpp"
#include "hublab/scenarios/web_traffic.hpp"
#include "hublab/sim/trace.hpp"
#include "hublab/web/cv.hpp"
#include "hublab/web/features.hpp"

namespace hublab::experiment {

// Seed scheme. Every trial seed is derive_seed(master, stream, index):
//   dictionary             kDictionary, 0
//   typist profile         kTypist, 0
//   site corpus            kSites, 0
//   profiling word i       kDictionary, 1 + i            (word draw)
//   attack word j          kDictionary, 2^32 + j         (word draw)
//   profiling trial i      kSimulation, i
//   attack trial (j, r)    kSimulation, 2^32 + j * trials_per_word + r
//   mitigation word j      kSimulation, 2^33 + j
//   website trace (s, k)   kSimulation, s * traces_per_site + k
//   sweep trace            kSimulation, 0
//   cross-validation       kFolds, 0
// Within a trial with seed t, the typist draws from derive_seed(t, kTypist, 0),
// traffic from derive_seed(t, kTraffic, 0), the VPN from derive_seed(t, kVpn, 0)
// and the simulator takes t itself.
inline constexpr std::uint64_t kAttackOffset = 1ULL << 32;
inline constexpr std::uint64_t kMitigationOffset = 1ULL << 33;

struct TrialFailure {
  std::string phase;
  std::size_t index = 0;
  std::string reason;

  friend bool operator==(const TrialFailure&, const TrialFailure&) = default;
};

struct KeystrokeTrial {
  std::size_t index = 0;
  std::string word;
  std::uint64_t seed = 0;
  std::size_t detected = 0;
  std::size_t true_positives = 0;
  std::size_t truth_events = 0;
  std::size_t labels_correct = 0;
  std::size_t overlaps_flagged = 0;
  std::vector<double> latencies_ms;
  std::size_t rank = 0;  // 1-based, 0 when absent or failed
  std::size_t candidates = 0;
  std::string failure;
};

struct KeystrokeRun {
  std::string alphabet;
  std::vector<std::string> dictionary;
  keystroke::HmmModel model;
  std::vector<KeystrokeTrial> profiling;
  std::vector<KeystrokeTrial> attack;
  std::size_t profiling_used = 0;
  /// Profiling phase, against ground truth.
  double label_accuracy = 0.0;
  std::size_t overlaps_flagged = 0;
  keystroke::DetectionScore detection;  // attack phase
  std::vector<keystroke::TopKAccuracy> topk;
  std::vector<TrialFailure> failures;
  /// First attack trial.
  sim::TraceBundle example;
};

struct SiteCorrelation {
  std::string label;
  std::size_t traces = 0;
  std::size_t undefined = 0;
  double mean_r = 0.0;
  double min_r = 0.0;
};

struct WebsiteRun {
  std::vector<scenarios::SiteProfile> sites;
  std::vector<SiteCorrelation> correlations;
  double mean_r = 0.0;  // mean of the per-site means
  std::size_t traces = 0;
  std::size_t kept = 0;
  std::vector<TrialFailure> failures;
  std::optional<web::CvReport> cv;
  /// First trace of the first site.
  web::FeatureSequence example_features;
  std::vector<double> example_truth;
};

struct SweepRun {
  web::IdleBaseline baseline;
  double threshold_ms = 0.0;
  std::vector<web::SizeDetection> detections;
  web::FeatureSequence features;
  std::vector<scenarios::BurstAnnotation> annotations;
};

struct PolicyResult {
  usb::ArbitrationKind policy = usb::ArbitrationKind::fair_round_robin;
  keystroke::DetectionScore detection;
  std::size_t keystroke_trials = 0;
  double mean_r = 0.0;
  std::size_t site_traces = 0;
  std::size_t undefined_r = 0;
};

struct MitigationRun {
  std::vector<PolicyResult> policies;
  std::vector<TrialFailure> failures;
};

/// In-memory scenario runs. When trace_dir is given, trial traces are written
/// below it.
///
/// Profiling phase only: fills the dictionary, model and profiling fields.
KeystrokeRun profile_keystroke(const ExperimentConfig& cfg, const std::filesystem::path* trace_dir = nullptr);
KeystrokeRun run_keystroke(const ExperimentConfig& cfg, const std::filesystem::path* trace_dir = nullptr);
WebsiteRun run_website(const ExperimentConfig& cfg, bool train = true,
                       const std::filesystem::path* trace_dir = nullptr);
SweepRun run_sweep(const ExperimentConfig& cfg, const std::filesystem::path* trace_dir = nullptr);
MitigationRun run_mitigation(const ExperimentConfig& cfg, const std::filesystem::path* trace_dir = nullptr);

/// "<words> Words, <letters> Letters".
std::string dataset_name(std::size_t words, std::size_t letters);

nlohmann::json summary_json(const KeystrokeRun& r);
nlohmann::json summary_json(const WebsiteRun& r);
nlohmann::json summary_json(const SweepRun& r);
nlohmann::json summary_json(const MitigationRun& r);

std::string keystroke_report(const KeystrokeRun& r, const ExperimentConfig& cfg);
std::string correlation_report(const WebsiteRun& r);
std::string sweep_report(const SweepRun& r);
std::string mitigation_report(const MitigationRun& r);

/// Runs the configured scenario and writes the run directory:
///   config.json, metadata.json      portable config; digest, seed, version
///   traces/                         per-trial traces with truth sidecars
///   models/                         fitted HMM or per-fold classifiers
///   reports/summary.json, *.txt     results and per-trial failures
///   figures/*.csv                   plot data
/// A non-empty output directory is refused unless `overwrite` is set and it
/// holds a previous run (metadata.json). Returns the run directory.
std::filesystem::path run_experiment(const ExperimentConfig& cfg, bool overwrite = false);

}  // namespace hublab::experiment
