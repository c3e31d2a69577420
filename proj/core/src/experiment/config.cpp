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

#include "hublab/experiment/config.hpp"

#include <fstream>
#include <sstream>

#include "hublab/common/error.hpp"
#include "hublab/common/stats.hpp"

namespace hublab::usb {

void to_json(nlohmann::json& j, const HubConfig& h) {
  j = nlohmann::json{{"speed_class", to_string(h.speed_class)},
                     {"tt_count", h.tt_count},
                     {"bulk_payload", h.bulk_payload.bytes()},
                     {"arbitration",
                      {{"kind", to_string(h.arbitration.kind)},
                       {"priority", h.arbitration.priority},
                       {"stream_salt", h.arbitration.stream_salt}}},
                     {"tt_frame_capacity", h.tt_frame_capacity},
                     {"frame_us", h.frame_us},
                     {"microframe_us", h.microframe_us}};
}

void from_json(const nlohmann::json& j, HubConfig& h) {
  HubConfig d;
  if (j.contains("speed_class")) d.speed_class = parse_speed_class(j.at("speed_class").get<std::string>());
  d.tt_count = j.value("tt_count", d.tt_count);
  if (j.contains("bulk_payload")) d.bulk_payload = PayloadSize(j.at("bulk_payload").get<std::int64_t>());
  if (j.contains("arbitration")) {
    const auto& a = j.at("arbitration");
    if (a.contains("kind")) d.arbitration.kind = parse_arbitration_kind(a.at("kind").get<std::string>());
    d.arbitration.priority = a.value("priority", d.arbitration.priority);
    d.arbitration.stream_salt = a.value("stream_salt", d.arbitration.stream_salt);
  }
  d.tt_frame_capacity = j.value("tt_frame_capacity", d.tt_frame_capacity);
  d.frame_us = j.value("frame_us", d.frame_us);
  d.microframe_us = j.value("microframe_us", d.microframe_us);
  h = d;
}

}  // namespace hublab::usb

namespace hublab::sim {

void to_json(nlohmann::json& j, const NoiseModel& n) { j = {{"jitter_us", n.jitter_us}}; }
void from_json(const nlohmann::json& j, NoiseModel& n) { j.at("jitter_us").get_to(n.jitter_us); }

void to_json(nlohmann::json& j, const ClosedLoopReader& r) {
  j = {{"read_bytes", r.read_bytes}, {"queue_depth", r.queue_depth}};
}
void from_json(const nlohmann::json& j, ClosedLoopReader& r) {
  j.at("read_bytes").get_to(r.read_bytes);
  j.at("queue_depth").get_to(r.queue_depth);
}

void to_json(nlohmann::json& j, const NicAggregation& a) {
  j = {{"max_bytes", a.max_bytes}, {"flush_us", a.flush_us}};
}
void from_json(const nlohmann::json& j, NicAggregation& a) {
  j.at("max_bytes").get_to(a.max_bytes);
  j.at("flush_us").get_to(a.flush_us);
}

}  // namespace hublab::sim

namespace hublab::scenarios {

void to_json(nlohmann::json& j, const SanitizeConfig& c) {
  j = {{"min_length_fraction", c.min_length_fraction}, {"stddev_floor_fraction", c.stddev_floor_fraction}};
}
void from_json(const nlohmann::json& j, SanitizeConfig& c) {
  j.at("min_length_fraction").get_to(c.min_length_fraction);
  j.at("stddev_floor_fraction").get_to(c.stddev_floor_fraction);
}

}  // namespace hublab::scenarios

namespace hublab::keystroke {

void to_json(nlohmann::json& j, const DetectorConfig& c) {
  j = {{"event_threshold_ms", c.event_threshold_ms},
       {"overlap_threshold_ms", c.overlap_threshold_ms},
       {"merge_window_ms", c.merge_window_ms},
       {"companion_window_ms", c.companion_window_ms}};
}
void from_json(const nlohmann::json& j, DetectorConfig& c) {
  DetectorConfig d;
  d.event_threshold_ms = j.value("event_threshold_ms", d.event_threshold_ms);
  d.overlap_threshold_ms = j.value("overlap_threshold_ms", d.overlap_threshold_ms);
  d.merge_window_ms = j.value("merge_window_ms", d.merge_window_ms);
  d.companion_window_ms = j.value("companion_window_ms", d.companion_window_ms);
  c = d;
}

void to_json(nlohmann::json& j, const HmmFitConfig& c) {
  j = {{"stddev_floor_ms", c.stddev_floor_ms}, {"shrinkage", c.shrinkage}};
}
void from_json(const nlohmann::json& j, HmmFitConfig& c) {
  HmmFitConfig d;
  d.stddev_floor_ms = j.value("stddev_floor_ms", d.stddev_floor_ms);
  d.shrinkage = j.value("shrinkage", d.shrinkage);
  c = d;
}

}  // namespace hublab::keystroke

namespace hublab::web {

void to_json(nlohmann::json& j, const DatasetShape& s) { j = {{"length", s.length}, {"pool", s.pool}}; }
void from_json(const nlohmann::json& j, DatasetShape& s) {
  DatasetShape d;
  d.length = j.value("length", d.length);
  d.pool = j.value("pool", d.pool);
  s = d;
}

}  // namespace hublab::web

namespace hublab::experiment {
namespace {

using nlohmann::json;

json policies_json(const std::vector<usb::ArbitrationKind>& ps) {
  json a = json::array();
  for (auto p : ps) a.push_back(usb::to_string(p));
  return a;
}

json settings_json(const KeystrokeSettings& k) {
  return {{"alphabet", k.alphabet},
          {"dictionary_size", k.dictionary_size},
          {"dictionary_file", k.dictionary_file},
          {"profiling_words", k.profiling_words},
          {"attack_words", k.attack_words},
          {"trials_per_word", k.trials_per_word},
          {"tail_ms", k.tail_ms},
          {"typist", k.typist},
          {"detector", k.detector},
          {"hmm", k.hmm},
          {"ks", k.ks},
          {"save_profiling_traces", k.save_profiling_traces}};
}

json settings_json(const WebsiteSettings& w) {
  json j{{"sites", w.sites},
         {"traces_per_site", w.traces_per_site},
         {"duration_ms", w.duration_ms},
         {"window_ms", w.window_ms},
         {"corpus", w.corpus},
         {"shape", w.shape},
         {"folds", w.folds},
         {"train", w.train}};
  if (w.vpn) j["vpn"] = *w.vpn;
  return j;
}

json settings_json(const SweepSettings& s) {
  return {{"sizes", s.sizes},
          {"repeats", s.repeats},
          {"gap_ms", s.gap_ms},
          {"window_ms", s.window_ms},
          {"mad_multiplier", s.mad_multiplier},
          {"pacing", s.pacing}};
}

json settings_json(const MitigationSettings& m) {
  return {{"policies", policies_json(m.policies)},
          {"keystroke_words", m.keystroke_words},
          {"traces_per_site", m.traces_per_site}};
}

// Every key of `in` must exist in `ref`; objects are checked recursively.
void check_known(const json& in, const json& ref, const std::string& path) {
  if (!in.is_object()) return;
  for (auto it = in.begin(); it != in.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!ref.is_object() || !ref.contains(it.key())) throw ConfigError("unknown config key: " + key);
    if (!it.value().is_null()) check_known(it.value(), ref.at(it.key()), key);
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid config: " + what);
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::keystroke: return "keystroke";
    case Scenario::website: return "website";
    case Scenario::resolution: return "resolution";
    case Scenario::mitigation: return "mitigation";
  }
  return "keystroke";
}

Scenario parse_scenario(std::string_view s) {
  if (s == "keystroke") return Scenario::keystroke;
  if (s == "website") return Scenario::website;
  if (s == "resolution") return Scenario::resolution;
  if (s == "mitigation") return Scenario::mitigation;
  throw ConfigError("unknown scenario: " + std::string(s));
}

void ExperimentConfig::validate() const {
  hub.validate();
  require(workers >= 1, "workers must be >= 1");
  require(!output_dir.empty(), "output_dir must not be empty");
  require(noise.jitter_us >= 0, "noise.jitter_us must be >= 0");
  require(spy.read_bytes > 0 && spy.queue_depth > 0, "spy read_bytes and queue_depth must be > 0");
  require(nic.max_bytes >= 0 && nic.flush_us >= 0, "nic values must be >= 0");
  require(sanitize_config.min_length_fraction >= 0 && sanitize_config.stddev_floor_fraction >= 0,
          "sanitize fractions must be >= 0");

  const auto& k = keystroke;
  require(!k.alphabet.empty() || !k.dictionary_file.empty(), "keystroke.alphabet must not be empty");
  require(k.dictionary_size >= 1, "keystroke.dictionary_size must be >= 1");
  require(k.profiling_words >= 1, "keystroke.profiling_words must be >= 1");
  require(k.attack_words >= 1, "keystroke.attack_words must be >= 1");
  require(k.trials_per_word >= 1, "keystroke.trials_per_word must be >= 1");
  require(k.tail_ms > 0, "keystroke.tail_ms must be > 0");
  require(!k.ks.empty(), "keystroke.ks must not be empty");
  for (auto v : k.ks) require(v >= 1, "keystroke.ks entries must be >= 1");
  try {
    k.detector.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("keystroke.detector: ") + e.what());
  }

  const auto& w = website;
  require(w.sites >= 2, "website.sites must be >= 2");
  require(w.folds >= 2, "website.folds must be >= 2");
  require(w.traces_per_site >= w.folds, "website.traces_per_site must be >= website.folds");
  require(w.duration_ms > 0 && w.window_ms > 0, "website duration and window must be > 0");
  require(w.shape.length >= 1 && w.shape.pool >= 1, "website.shape length and pool must be >= 1");
  require(w.train.hidden >= 1 && w.train.epochs >= 1 && w.train.batch_size >= 1 && w.train.learning_rate > 0,
          "website.train hidden, epochs, batch_size and learning_rate must be positive");

  const auto& s = sweep;
  require(!s.sizes.empty(), "sweep.sizes must not be empty");
  for (auto v : s.sizes) require(v > 0, "sweep.sizes entries must be > 0");
  require(s.repeats >= 1, "sweep.repeats must be >= 1");
  require(s.gap_ms > 0 && s.window_ms > 0, "sweep gap and window must be > 0");
  require(s.mad_multiplier >= 0, "sweep.mad_multiplier must be >= 0");

  require(!mitigation.policies.empty(), "mitigation.policies must not be empty");
  require(mitigation.keystroke_words >= 1 && mitigation.traces_per_site >= 1,
          "mitigation trial counts must be >= 1");
}

std::string ExperimentConfig::digest() const { return hex64(fnv1a64(to_json(*this, true).dump())); }

nlohmann::json to_json(const ExperimentConfig& c, bool portable) {
  json j{{"scenario", to_string(c.scenario)},
         {"hub", c.hub},
         {"noise", c.noise},
         {"spy", c.spy},
         {"nic", c.nic},
         {"seed", c.seed},
         {"save_traces", c.save_traces},
         {"sanitize", c.sanitize},
         {"sanitize_config", c.sanitize_config},
         {"keystroke", settings_json(c.keystroke)},
         {"website", settings_json(c.website)},
         {"sweep", settings_json(c.sweep)},
         {"mitigation", settings_json(c.mitigation)}};
  if (!portable) {
    j["workers"] = c.workers;
    j["output_dir"] = c.output_dir;
  }
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& in) {
  if (!in.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig ref;
  ref.website.vpn = scenarios::VpnParams{};
  check_known(in, to_json(ref), "");

  json m = to_json(ExperimentConfig{});
  m.merge_patch(in);
  ExperimentConfig c;
  try {
    c.scenario = parse_scenario(m.at("scenario").get<std::string>());
    m.at("hub").get_to(c.hub);
    m.at("noise").get_to(c.noise);
    m.at("spy").get_to(c.spy);
    m.at("nic").get_to(c.nic);
    m.at("seed").get_to(c.seed);
    m.at("workers").get_to(c.workers);
    m.at("output_dir").get_to(c.output_dir);
    m.at("save_traces").get_to(c.save_traces);
    m.at("sanitize").get_to(c.sanitize);
    m.at("sanitize_config").get_to(c.sanitize_config);

    const auto& k = m.at("keystroke");
    auto& ks = c.keystroke;
    k.at("alphabet").get_to(ks.alphabet);
    k.at("dictionary_size").get_to(ks.dictionary_size);
    k.at("dictionary_file").get_to(ks.dictionary_file);
    k.at("profiling_words").get_to(ks.profiling_words);
    k.at("attack_words").get_to(ks.attack_words);
    k.at("trials_per_word").get_to(ks.trials_per_word);
    k.at("tail_ms").get_to(ks.tail_ms);
    k.at("typist").get_to(ks.typist);
    k.at("detector").get_to(ks.detector);
    k.at("hmm").get_to(ks.hmm);
    k.at("ks").get_to(ks.ks);
    k.at("save_profiling_traces").get_to(ks.save_profiling_traces);

    const auto& w = m.at("website");
    auto& ws = c.website;
    w.at("sites").get_to(ws.sites);
    w.at("traces_per_site").get_to(ws.traces_per_site);
    w.at("duration_ms").get_to(ws.duration_ms);
    w.at("window_ms").get_to(ws.window_ms);
    w.at("corpus").get_to(ws.corpus);
    if (w.contains("vpn")) ws.vpn = w.at("vpn").get<scenarios::VpnParams>();
    w.at("shape").get_to(ws.shape);
    w.at("folds").get_to(ws.folds);
    w.at("train").get_to(ws.train);

    const auto& s = m.at("sweep");
    s.at("sizes").get_to(c.sweep.sizes);
    s.at("repeats").get_to(c.sweep.repeats);
    s.at("gap_ms").get_to(c.sweep.gap_ms);
    s.at("window_ms").get_to(c.sweep.window_ms);
    s.at("mad_multiplier").get_to(c.sweep.mad_multiplier);
    s.at("pacing").get_to(c.sweep.pacing);

    const auto& mi = m.at("mitigation");
    c.mitigation.policies.clear();
    for (const auto& p : mi.at("policies")) {
      c.mitigation.policies.push_back(usb::parse_arbitration_kind(p.get<std::string>()));
    }
    mi.at("keystroke_words").get_to(c.mitigation.keystroke_words);
    mi.at("traces_per_site").get_to(c.mitigation.traces_per_site);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace hublab::experiment
