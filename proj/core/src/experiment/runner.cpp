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

#include "hublab/experiment/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"
#include "hublab/common/stats.hpp"
#include "hublab/scenarios/dictionary.hpp"
#include "hublab/scenarios/sanitize.hpp"
#include "hublab/scenarios/typist.hpp"
#include "hublab/sim/simulator.hpp"
#include "hublab/sim/trace_io.hpp"
#include "hublab/usb/bulk_limits.hpp"

namespace hublab::experiment {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs fn(0..n-1) on up to `workers` threads. fn must not throw.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    jobs.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i; (i = next++) < n;) fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
}

std::string padded(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::int64_t ms_to_us(double ms) { return static_cast<std::int64_t>(std::llround(ms * 1000.0)); }

// ---------------------------------------------------------------- keystroke

struct KeystrokeSetup {
  std::string alphabet;
  std::vector<std::string> dictionary;
  scenarios::TypistProfile profile;
};

KeystrokeSetup keystroke_setup(const ExperimentConfig& cfg) {
  KeystrokeSetup s;
  const auto& k = cfg.keystroke;
  if (!k.dictionary_file.empty()) {
    s.dictionary = scenarios::load_word_list(k.dictionary_file);
    if (s.dictionary.empty()) throw ConfigError("dictionary file " + k.dictionary_file + " has no words");
    s.alphabet = scenarios::alphabet_of(s.dictionary);
  } else {
    s.alphabet = k.alphabet;
    s.dictionary = scenarios::generate_dictionary(s.alphabet, k.dictionary_size,
                                                  derive_seed(cfg.seed, streams::kDictionary, 0));
  }
  s.profile = scenarios::make_typist_profile(s.alphabet, k.typist, derive_seed(cfg.seed, streams::kTypist, 0));
  return s;
}

const std::string& draw_word(const std::vector<std::string>& dict, std::uint64_t master, std::uint64_t index) {
  Rng rng(derive_seed(master, streams::kDictionary, index));
  return dict[rng.below(dict.size())];
}

struct KeystrokeOutcome {
  KeystrokeTrial trial;
  scenarios::TraceSummary summary;
  bool simulated = false;
};

KeystrokeOutcome keystroke_trial(const ExperimentConfig& cfg, const usb::HubConfig& hub,
                                 const scenarios::TypistProfile& profile, const std::string& word,
                                 std::size_t index, std::uint64_t seed, bool with_labels,
                                 const fs::path* save_stem, sim::TraceBundle* keep) {
  KeystrokeOutcome out;
  auto& t = out.trial;
  t.index = index;
  t.word = word;
  t.seed = seed;
  try {
    const auto truth = scenarios::gen_typist_events(word, profile, derive_seed(seed, streams::kTypist, 0));
    const auto workload = sim::keystroke_workload(truth, cfg.noise);
    const std::int64_t duration = truth.events.back().t_us + ms_to_us(cfg.keystroke.tail_ms);
    const auto bundle = sim::run_simulation(hub, workload, duration, seed);
    out.simulated = true;
    out.summary = scenarios::TraceSummary::of(bundle.spy);
    if (save_stem) sim::save_bundle(*save_stem, bundle);
    if (keep) *keep = bundle;

    const auto events = keystroke::detect_key_events(bundle.spy, cfg.keystroke.detector);
    const auto score = keystroke::score_detection(events, truth);
    t.detected = score.detected;
    t.true_positives = score.true_positives;
    t.truth_events = score.truth;
    if (with_labels) {
      const auto rep = keystroke::label_events(events, truth, cfg.keystroke.detector);
      t.labels_correct = rep.correct;
      t.overlaps_flagged = rep.overlaps_flagged;
    }
    const auto presses = keystroke::press_onsets(keystroke::assign_labels(events, cfg.keystroke.detector));
    if (presses.size() != word.size()) {
      t.failure = "detected " + std::to_string(presses.size()) + " presses, expected " +
                  std::to_string(word.size());
      return out;
    }
    t.latencies_ms = keystroke::extract_digram_latencies(presses);
  } catch (const std::exception& e) {
    t.failure = e.what();
  }
  return out;
}

// Marks sanitizer rejections as failures. Only simulated trials take part.
void apply_sanitizer(const ExperimentConfig& cfg, std::vector<KeystrokeOutcome>& outs) {
  if (!cfg.sanitize) return;
  std::vector<scenarios::TraceSummary> summaries;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (!outs[i].simulated) continue;
    summaries.push_back(outs[i].summary);
    where.push_back(i);
  }
  if (summaries.empty()) return;
  const auto res = scenarios::sanitize_summaries(summaries, cfg.sanitize_config);
  for (const auto& r : res.rejected) {
    auto& t = outs[where[r.index]].trial;
    if (t.failure.empty()) t.failure = "sanitized (" + r.reason + "): " + r.detail;
    t.latencies_ms.clear();
  }
}

// ------------------------------------------------------------------ website

struct WebOutcome {
  web::FeatureSequence features;
  std::vector<double> truth;
  web::Correlation corr;
  scenarios::TraceSummary summary;
  std::string failure;
};

WebOutcome web_trace(const ExperimentConfig& cfg, const usb::HubConfig& hub, const scenarios::SiteProfile& site,
                     std::uint64_t seed, const fs::path* save_stem) {
  WebOutcome out;
  try {
    const std::int64_t duration = ms_to_us(cfg.website.duration_ms);
    auto traffic = scenarios::gen_web_traffic(site, duration, derive_seed(seed, streams::kTraffic, 0));
    if (cfg.website.vpn) {
      traffic = scenarios::vpn_transform(traffic, *cfg.website.vpn, derive_seed(seed, streams::kVpn, 0));
      std::erase_if(traffic.points, [&](const sim::TrafficPoint& p) { return p.t_us >= duration; });
    }
    auto workload = sim::web_workload(traffic, cfg.noise, cfg.spy, cfg.nic);
    workload.label = site.label;
    const auto bundle = sim::run_simulation(hub, workload, duration, seed);
    if (save_stem) sim::save_bundle(*save_stem, bundle);
    out.summary = scenarios::TraceSummary::of(bundle.spy);
    out.features = web::featurize(bundle.spy, cfg.website.window_ms);
    out.truth = web::bin_traffic(traffic, cfg.website.window_ms, out.features.values.size());
    out.corr = web::pearson(out.features.values, out.truth);
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  return out;
}

std::vector<scenarios::SiteProfile> site_corpus(const ExperimentConfig& cfg) {
  return scenarios::generate_site_corpus(cfg.website.sites, derive_seed(cfg.seed, streams::kSites, 0),
                                         cfg.website.corpus);
}

std::string web_stem(std::size_t k) { return "trial-" + padded(k, 3); }

struct CorrelationTally {
  std::vector<SiteCorrelation> per_site;
  double mean_r = 0.0;
  std::size_t undefined = 0;
};

CorrelationTally tally(const std::vector<scenarios::SiteProfile>& sites, std::size_t per_site,
                       const std::vector<WebOutcome>& outs) {
  CorrelationTally t;
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    SiteCorrelation c;
    c.label = sites[s].label;
    std::vector<double> rs;
    for (std::size_t k = 0; k < per_site; ++k) {
      const auto& o = outs[s * per_site + k];
      if (!o.failure.empty()) continue;
      ++c.traces;
      if (!o.corr.defined) {
        ++c.undefined;
        continue;
      }
      rs.push_back(o.corr.r);
    }
    t.undefined += c.undefined;
    if (!rs.empty()) {
      c.mean_r = mean(rs);
      c.min_r = *std::min_element(rs.begin(), rs.end());
      sum += c.mean_r;
      ++counted;
    }
    t.per_site.push_back(c);
  }
  t.mean_r = counted ? sum / static_cast<double>(counted) : 0.0;
  return t;
}

json failures_json(const std::vector<TrialFailure>& fs) {
  json a = json::array();
  for (const auto& f : fs) a.push_back({{"phase", f.phase}, {"index", f.index}, {"reason", f.reason}});
  return a;
}

json score_json(const keystroke::DetectionScore& s) {
  return {{"true_positives", s.true_positives},
          {"detected", s.detected},
          {"truth", s.truth},
          {"precision", s.precision()},
          {"recall", s.recall()},
          {"f1", s.f1()}};
}

std::string failures_text(const std::vector<TrialFailure>& fs) {
  std::ostringstream os;
  os << "phase,index,reason\n";
  for (const auto& f : fs) os << f.phase << ',' << f.index << ",\"" << f.reason << "\"\n";
  return os.str();
}

}  // namespace

std::string dataset_name(std::size_t words, std::size_t letters) {
  return std::to_string(words) + " Words, " + std::to_string(letters) + " Letters";
}

KeystrokeRun profile_keystroke(const ExperimentConfig& cfg, const fs::path* trace_dir) {
  cfg.validate();
  const auto& k = cfg.keystroke;
  const auto setup = keystroke_setup(cfg);
  KeystrokeRun run;
  run.alphabet = setup.alphabet;
  run.dictionary = setup.dictionary;

  std::optional<fs::path> profile_dir;
  if (trace_dir && k.save_profiling_traces) {
    profile_dir = *trace_dir / "profile";
    fs::create_directories(*profile_dir);
  }

  // Profiling: ground truth available, used to fit the model.
  std::vector<KeystrokeOutcome> prof(k.profiling_words);
  parallel_for(prof.size(), cfg.workers, [&](std::size_t i) {
    const auto& word = draw_word(setup.dictionary, cfg.seed, 1 + i);
    std::optional<fs::path> stem;
    if (profile_dir) stem = *profile_dir / padded(i, 5);
    prof[i] = keystroke_trial(cfg, cfg.hub, setup.profile, word, i, derive_seed(cfg.seed, streams::kSimulation, i),
                              true, stem ? &*stem : nullptr, nullptr);
  });
  apply_sanitizer(cfg, prof);

  std::vector<keystroke::ProfileSample> corpus;
  std::size_t correct = 0, truth_events = 0;
  for (auto& o : prof) {
    auto& t = o.trial;
    correct += t.labels_correct;
    truth_events += t.truth_events;
    run.overlaps_flagged += t.overlaps_flagged;
    if (t.failure.empty()) {
      corpus.push_back({t.word, t.latencies_ms});
    } else {
      run.failures.push_back({"profiling", t.index, t.failure});
    }
    run.profiling.push_back(std::move(t));
  }
  run.profiling_used = corpus.size();
  run.label_accuracy = truth_events ? static_cast<double>(correct) / static_cast<double>(truth_events) : 0.0;
  if (corpus.empty()) throw DomainError("keystroke run: every profiling trial failed");
  run.model = keystroke::fit_hmm(corpus, setup.alphabet, setup.dictionary, k.hmm);
  return run;
}

KeystrokeRun run_keystroke(const ExperimentConfig& cfg, const fs::path* trace_dir) {
  KeystrokeRun run = profile_keystroke(cfg, trace_dir);
  const auto& k = cfg.keystroke;
  const auto setup = keystroke_setup(cfg);
  std::optional<fs::path> attack_dir;
  if (trace_dir) {
    attack_dir = *trace_dir / "attack";
    fs::create_directories(*attack_dir);
  }

  // Attack: only timing is used.
  const std::size_t n_attack = k.attack_words * k.trials_per_word;
  std::vector<KeystrokeOutcome> att(n_attack);
  parallel_for(n_attack, cfg.workers, [&](std::size_t i) {
    const std::size_t j = i / k.trials_per_word;
    const auto& word = draw_word(setup.dictionary, cfg.seed, kAttackOffset + j);
    std::optional<fs::path> stem;
    if (attack_dir) stem = *attack_dir / padded(i, 5);
    att[i] = keystroke_trial(cfg, cfg.hub, setup.profile, word, i,
                             derive_seed(cfg.seed, streams::kSimulation, kAttackOffset + i), false,
                             stem ? &*stem : nullptr, i == 0 ? &run.example : nullptr);
  });
  apply_sanitizer(cfg, att);

  std::vector<keystroke::RankedWords> rankings(n_attack);
  parallel_for(n_attack, cfg.workers, [&](std::size_t i) {
    auto& t = att[i].trial;
    if (!t.failure.empty()) return;
    rankings[i] = keystroke::rank_dictionary(run.model, t.latencies_ms, setup.dictionary);
    t.candidates = rankings[i].entries.size();
    t.rank = rankings[i].rank_of(t.word);
  });
  std::vector<std::string> truths;
  for (auto& o : att) {
    auto& t = o.trial;
    run.detection.true_positives += t.true_positives;
    run.detection.detected += t.detected;
    run.detection.truth += t.truth_events;
    if (!t.failure.empty()) run.failures.push_back({"attack", t.index, t.failure});
    truths.push_back(t.word);
    run.attack.push_back(std::move(t));
  }
  run.topk = keystroke::evaluate_topk(rankings, truths, k.ks);
  return run;
}

WebsiteRun run_website(const ExperimentConfig& cfg, bool train, const fs::path* trace_dir) {
  cfg.validate();
  const auto& w = cfg.website;
  WebsiteRun run;
  run.sites = site_corpus(cfg);
  const std::size_t per = w.traces_per_site;
  run.traces = run.sites.size() * per;
  if (trace_dir) {
    for (const auto& s : run.sites) fs::create_directories(*trace_dir / s.label);
  }

  std::vector<WebOutcome> outs(run.traces);
  parallel_for(run.traces, cfg.workers, [&](std::size_t i) {
    const auto& site = run.sites[i / per];
    std::optional<fs::path> stem;
    if (trace_dir) stem = *trace_dir / site.label / web_stem(i % per);
    outs[i] = web_trace(cfg, cfg.hub, site, derive_seed(cfg.seed, streams::kSimulation, i), stem ? &*stem : nullptr);
  });

  std::vector<bool> keep(run.traces, true);
  std::vector<scenarios::TraceSummary> summaries;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (!outs[i].failure.empty()) {
      keep[i] = false;
      run.failures.push_back({"trace", i, outs[i].failure});
      continue;
    }
    summaries.push_back(outs[i].summary);
    where.push_back(i);
  }
  if (cfg.sanitize && !summaries.empty()) {
    const auto res = scenarios::sanitize_summaries(summaries, cfg.sanitize_config);
    for (const auto& r : res.rejected) {
      keep[where[r.index]] = false;
      run.failures.push_back({"trace", where[r.index], "sanitized (" + r.reason + "): " + r.detail});
    }
    std::sort(run.failures.begin(), run.failures.end(),
              [](const TrialFailure& a, const TrialFailure& b) { return a.index < b.index; });
  }

  const auto t = tally(run.sites, per, outs);
  run.correlations = t.per_site;
  run.mean_r = t.mean_r;
  if (!outs.empty() && outs[0].failure.empty()) {
    run.example_features = outs[0].features;
    run.example_truth = outs[0].truth;
  }

  web::LabeledDataset data(w.shape);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (!keep[i]) continue;
    const auto& site = run.sites[i / per];
    data.add(outs[i].features, site.label + "/" + web_stem(i % per));
    ++run.kept;
  }
  if (train) {
    web::CvConfig cv;
    cv.folds = w.folds;
    cv.seed = derive_seed(cfg.seed, streams::kFolds, 0);
    cv.train = w.train;
    cv.workers = cfg.workers;
    run.cv = web::cross_validate(data, cv);
  }
  return run;
}

SweepRun run_sweep(const ExperimentConfig& cfg, const fs::path* trace_dir) {
  cfg.validate();
  const auto& s = cfg.sweep;
  const auto sweep = scenarios::burst_sweep_workload(s.sizes, s.repeats, s.gap_ms, s.pacing,
                                                     derive_seed(cfg.seed, streams::kTraffic, 0));
  auto workload = sim::web_workload(sweep.timeline, cfg.noise, cfg.spy, cfg.nic);
  workload.scenario = "resolution";
  const auto bundle = sim::run_simulation(cfg.hub, workload, sweep.duration_us,
                                          derive_seed(cfg.seed, streams::kSimulation, 0));
  if (trace_dir) {
    fs::create_directories(*trace_dir);
    sim::save_bundle(*trace_dir / "sweep", bundle);
  }
  SweepRun run;
  run.features = web::featurize(bundle.spy, s.window_ms);
  run.annotations = sweep.annotations;
  run.baseline = web::idle_baseline(run.features, run.annotations);
  run.threshold_ms = s.mad_multiplier * run.baseline.mad_ms;
  run.detections = web::detect_bursts(run.features, run.annotations, run.baseline.baseline_ms, run.threshold_ms);
  return run;
}

MitigationRun run_mitigation(const ExperimentConfig& cfg, const fs::path* trace_dir) {
  cfg.validate();
  const auto setup = keystroke_setup(cfg);
  const auto sites = site_corpus(cfg);
  const auto& m = cfg.mitigation;
  MitigationRun run;
  for (const auto policy : m.policies) {
    usb::HubConfig hub = cfg.hub;
    hub.arbitration.kind = policy;
    const std::string name(usb::to_string(policy));
    std::optional<fs::path> dir;
    if (trace_dir) {
      dir = *trace_dir / name;
      fs::create_directories(*dir / "keystroke");
      fs::create_directories(*dir / "website");
    }

    PolicyResult res;
    res.policy = policy;
    std::vector<KeystrokeOutcome> ks(m.keystroke_words);
    parallel_for(ks.size(), cfg.workers, [&](std::size_t j) {
      const auto& word = draw_word(setup.dictionary, cfg.seed, kAttackOffset + j);
      std::optional<fs::path> stem;
      if (dir) stem = *dir / "keystroke" / padded(j, 5);
      ks[j] = keystroke_trial(cfg, hub, setup.profile, word, j,
                              derive_seed(cfg.seed, streams::kSimulation, kMitigationOffset + j), false,
                              stem ? &*stem : nullptr, nullptr);
    });
    for (const auto& o : ks) {
      res.detection.true_positives += o.trial.true_positives;
      res.detection.detected += o.trial.detected;
      res.detection.truth += o.trial.truth_events;
      ++res.keystroke_trials;
      if (!o.simulated) run.failures.push_back({name + "/keystroke", o.trial.index, o.trial.failure});
    }

    const std::size_t per = m.traces_per_site;
    std::vector<WebOutcome> ws(sites.size() * per);
    parallel_for(ws.size(), cfg.workers, [&](std::size_t i) {
      std::optional<fs::path> stem;
      if (dir) stem = *dir / "website" / (sites[i / per].label + "-" + padded(i % per, 3));
      ws[i] = web_trace(cfg, hub, sites[i / per], derive_seed(cfg.seed, streams::kSimulation, i),
                        stem ? &*stem : nullptr);
    });
    for (std::size_t i = 0; i < ws.size(); ++i) {
      if (!ws[i].failure.empty()) run.failures.push_back({name + "/website", i, ws[i].failure});
    }
    const auto t = tally(sites, per, ws);
    res.mean_r = t.mean_r;
    res.undefined_r = t.undefined;
    res.site_traces = ws.size();
    run.policies.push_back(res);
  }
  return run;
}

// ------------------------------------------------------------------ reports

json summary_json(const KeystrokeRun& r) {
  json topk = json::array();
  for (const auto& t : r.topk) topk.push_back({{"k", t.k}, {"accuracy", t.accuracy}});
  json trials = json::array();
  for (const auto& t : r.attack) {
    trials.push_back({{"index", t.index}, {"word", t.word}, {"seed", t.seed}, {"rank", t.rank},
                      {"candidates", t.candidates}, {"failure", t.failure}});
  }
  return {{"scenario", "keystroke"},
          {"dataset", dataset_name(r.dictionary.size(), r.alphabet.size())},
          {"dictionary_size", r.dictionary.size()},
          {"alphabet", r.alphabet},
          {"profiling_trials", r.profiling.size()},
          {"profiling_used", r.profiling_used},
          {"label_accuracy", r.label_accuracy},
          {"overlaps_flagged", r.overlaps_flagged},
          {"attack_trials", r.attack.size()},
          {"detection", score_json(r.detection)},
          {"topk", topk},
          {"attack", trials},
          {"failures", failures_json(r.failures)}};
}

json summary_json(const WebsiteRun& r) {
  json sites = json::array();
  for (const auto& c : r.correlations) {
    sites.push_back({{"label", c.label}, {"traces", c.traces}, {"undefined", c.undefined},
                     {"mean_r", c.mean_r}, {"min_r", c.min_r}});
  }
  json j{{"scenario", "website"},
         {"sites", r.sites.size()},
         {"traces", r.traces},
         {"kept", r.kept},
         {"mean_r", r.mean_r},
         {"correlation", sites},
         {"failures", failures_json(r.failures)}};
  if (r.cv) j["cv"] = *r.cv;
  return j;
}

json summary_json(const SweepRun& r) {
  json det = json::array();
  for (const auto& d : r.detections) {
    det.push_back({{"size_bytes", d.size_bytes}, {"detected", d.detected}, {"repeats", d.repeats}});
  }
  return {{"scenario", "resolution"},
          {"baseline_ms", r.baseline.baseline_ms},
          {"mad_ms", r.baseline.mad_ms},
          {"threshold_ms", r.threshold_ms},
          {"windows", r.features.values.size()},
          {"detections", det}};
}

json summary_json(const MitigationRun& r) {
  json ps = json::array();
  for (const auto& p : r.policies) {
    ps.push_back({{"policy", usb::to_string(p.policy)},
                  {"keystroke_trials", p.keystroke_trials},
                  {"detection", score_json(p.detection)},
                  {"site_traces", p.site_traces},
                  {"undefined_r", p.undefined_r},
                  {"mean_r", p.mean_r}});
  }
  return {{"scenario", "mitigation"}, {"policies", ps}, {"failures", failures_json(r.failures)}};
}

std::string keystroke_report(const KeystrokeRun& r, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "dataset                  alphabet size";
  for (const auto& t : r.topk) os << "  Top-" << t.k;
  os << '\n';
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-24s %-13zu", dataset_name(r.dictionary.size(), r.alphabet.size()).c_str(),
                r.alphabet.size());
  os << buf;
  for (const auto& t : r.topk) {
    std::snprintf(buf, sizeof buf, "  %5.1f%%", 100.0 * t.accuracy);
    os << buf;
  }
  os << "\n\n";
  os << "alphabet            " << r.alphabet << '\n';
  os << "profiling trials    " << r.profiling.size() << " (" << r.profiling_used << " used)\n";
  os << "label accuracy      " << fixed(100.0 * r.label_accuracy, 2) << "% (" << r.overlaps_flagged
     << " overlaps flagged)\n";
  os << "attack trials       " << r.attack.size() << " (" << cfg.keystroke.attack_words << " words x "
     << cfg.keystroke.trials_per_word << ")\n";
  os << "detection F1        " << fixed(r.detection.f1(), 4) << " (precision " << fixed(r.detection.precision(), 4)
     << ", recall " << fixed(r.detection.recall(), 4) << ")\n";
  os << "failed trials       " << r.failures.size() << '\n';
  return os.str();
}

std::string correlation_report(const WebsiteRun& r) {
  std::ostringstream os;
  os << "site        traces  mean_r   min_r    undefined\n";
  char buf[128];
  for (const auto& c : r.correlations) {
    std::snprintf(buf, sizeof buf, "%-10s  %-6zu  %7.4f  %7.4f  %zu\n", c.label.c_str(), c.traces, c.mean_r, c.min_r,
                  c.undefined);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "mean of site means: %.4f\n", r.mean_r);
  os << buf;
  return os.str();
}

std::string sweep_report(const SweepRun& r) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "baseline %.4f ms, MAD %.4f ms, threshold +%.4f ms\n", r.baseline.baseline_ms,
                r.baseline.mad_ms, r.threshold_ms);
  os << buf << "size_bytes  detected\n";
  for (const auto& d : r.detections) {
    std::snprintf(buf, sizeof buf, "%-10lld  %lld/%lld\n", static_cast<long long>(d.size_bytes),
                  static_cast<long long>(d.detected), static_cast<long long>(d.repeats));
    os << buf;
  }
  return os.str();
}

std::string mitigation_report(const MitigationRun& r) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-22s  %-9s  %-9s  %-9s  %s\n", "policy", "key F1", "precision", "recall",
                "mean site r");
  os << buf;
  for (const auto& p : r.policies) {
    std::snprintf(buf, sizeof buf, "%-22s  %-9.4f  %-9.4f  %-9.4f  %.4f\n", std::string(usb::to_string(p.policy)).c_str(),
                  p.detection.f1(), p.detection.precision(), p.detection.recall(), p.mean_r);
    os << buf;
  }
  return os.str();
}

// ---------------------------------------------------------------- run dirs

namespace {

std::string keystroke_trace_csv(const sim::TraceBundle& b) {
  std::ostringstream os;
  os << "series,t_us,value\n";
  for (const auto& r : b.spy.records) os << "spy_delay_us," << r.t_us << ',' << r.delay_us << '\n';
  if (b.key_truth) {
    for (const auto& e : b.key_truth->events) {
      os << (e.kind == sim::KeyAction::press ? "press," : "release,") << e.t_us << ',' << e.ch << '\n';
    }
  }
  return os.str();
}

std::string sweep_windows_csv(const SweepRun& r) {
  std::ostringstream os;
  os << "window,t_ms,max_delay_ms,burst_bytes\n";
  const double w = r.features.window_ms;
  std::size_t a = 0;
  for (std::size_t i = 0; i < r.features.values.size(); ++i) {
    const double lo = static_cast<double>(i) * w * 1000.0;
    while (a < r.annotations.size() && static_cast<double>(r.annotations[a].end_us) < lo) ++a;
    std::int64_t size = 0;
    if (a < r.annotations.size() && static_cast<double>(r.annotations[a].start_us) < lo + w * 1000.0) {
      size = r.annotations[a].size_bytes;
    }
    os << i << ',' << format_double(static_cast<double>(i) * w) << ',' << format_double(r.features.values[i]) << ','
       << size << '\n';
  }
  return os.str();
}

std::string website_windows_csv(const WebsiteRun& r) {
  std::ostringstream os;
  os << "window,t_ms,spy_max_delay_ms,victim_bytes\n";
  const auto& f = r.example_features;
  for (std::size_t i = 0; i < f.values.size() && i < r.example_truth.size(); ++i) {
    os << i << ',' << format_double(static_cast<double>(i) * f.window_ms) << ',' << format_double(f.values[i]) << ','
       << format_double(r.example_truth[i]) << '\n';
  }
  return os.str();
}

void prepare_output(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec)) {
    if (!overwrite) throw IoError("output directory " + dir.string() + " is not empty");
    if (!fs::exists(dir / "metadata.json")) {
      throw IoError("refusing to overwrite " + dir.string() + ": it does not hold a previous run");
    }
    fs::remove_all(dir, ec);
    if (ec) throw IoError("cannot clear " + dir.string() + ": " + ec.message());
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".probe";
  {
    std::ofstream p(probe);
    if (!p) throw IoError("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

}  // namespace

fs::path run_experiment(const ExperimentConfig& cfg, bool overwrite) {
  cfg.validate();
  const fs::path dir = cfg.output_dir;
  prepare_output(dir, overwrite);
  for (const char* sub : {"traces", "models", "reports", "figures"}) fs::create_directories(dir / sub);

  write_json(dir / "config.json", to_json(cfg, true));
  write_json(dir / "metadata.json", {{"tool", "hublab"},
                                     {"version", HUBLAB_VERSION},
                                     {"scenario", to_string(cfg.scenario)},
                                     {"config_digest", cfg.digest()},
                                     {"master_seed", cfg.seed},
                                     {"hub_digest", cfg.hub.digest()}});

  const fs::path traces = dir / "traces";
  const fs::path* tdir = cfg.save_traces ? &traces : nullptr;
  json summary;
  std::vector<TrialFailure> failures;

  switch (cfg.scenario) {
    case Scenario::keystroke: {
      const auto r = run_keystroke(cfg, tdir);
      keystroke::save_hmm(dir / "models" / "hmm.json", r.model);
      scenarios::save_word_list(dir / "models" / "dictionary.txt", r.dictionary);
      write_text(dir / "reports" / "keystroke.txt", keystroke_report(r, cfg));
      write_text(dir / "figures" / "keystroke_trace.csv", keystroke_trace_csv(r.example));
      summary = summary_json(r);
      failures = r.failures;
      break;
    }
    case Scenario::website: {
      const auto r = run_website(cfg, true, tdir);
      for (const auto& f : r.cv->folds) {
        json m{{"fold", f.fold},
               {"normalizer", {{"mean", f.normalizer.mean}, {"stddev", f.normalizer.stddev}}},
               {"labels", r.cv->labels},
               {"model", f.model}};
        write_json(dir / "models" / ("fold-" + std::to_string(f.fold) + ".json"), m);
      }
      write_text(dir / "reports" / "cv.txt", web::format_cv_report(*r.cv));
      write_text(dir / "reports" / "correlation.txt", correlation_report(r));
      write_text(dir / "figures" / "website_windows.csv", website_windows_csv(r));
      summary = summary_json(r);
      summary["hub_speed_class"] = usb::to_string(cfg.hub.speed_class);
      summary["vpn"] = cfg.website.vpn.has_value();
      summary["shape"] = cfg.website.shape;
      failures = r.failures;
      break;
    }
    case Scenario::resolution: {
      const auto r = run_sweep(cfg, tdir);
      write_text(dir / "reports" / "sweep.txt", sweep_report(r));
      write_text(dir / "figures" / "sweep_windows.csv", sweep_windows_csv(r));
      summary = summary_json(r);
      break;
    }
    case Scenario::mitigation: {
      const auto r = run_mitigation(cfg, tdir);
      write_text(dir / "reports" / "mitigation.txt", mitigation_report(r));
      summary = summary_json(r);
      failures = r.failures;
      break;
    }
  }
  summary["config_digest"] = cfg.digest();
  summary["master_seed"] = cfg.seed;
  write_json(dir / "reports" / "summary.json", summary);
  write_text(dir / "reports" / "failures.csv", failures_text(failures));
  return dir;
}

}  // namespace hublab::experiment
