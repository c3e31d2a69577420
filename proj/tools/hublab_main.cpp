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

// hublab command-line front end.
//
// Every subcommand takes one optional positional argument, a JSON experiment
// config; flags override individual fields.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"
#include "hublab/experiment/config.hpp"
#include "hublab/experiment/report.hpp"
#include "hublab/experiment/runner.hpp"
#include "hublab/keystroke/detector.hpp"
#include "hublab/keystroke/hmm.hpp"
#include "hublab/scenarios/dictionary.hpp"
#include "hublab/scenarios/sanitize.hpp"
#include "hublab/scenarios/typist.hpp"
#include "hublab/scenarios/web_traffic.hpp"
#include "hublab/sim/simulator.hpp"
#include "hublab/sim/trace_io.hpp"
#include "hublab/web/features.hpp"

namespace fs = std::filesystem;
using namespace hublab;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfig = 3,
  kIo = 4,
  kDomain = 5,
  kTraining = 6,
};

constexpr const char* kFooter =
    "Exit codes: 0 success, 1 unexpected failure, 2 usage, 3 invalid config,\n"
    "4 I/O error, 5 domain error, 6 training diverged.";

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  bool force = false;
  bool no_traces = false;
  bool no_sanitize = false;
};

void add_common(CLI::App* cmd, Common& c, bool run_flags = true) {
  cmd->add_option("config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--workers", c.workers, "concurrent trial jobs");
  cmd->add_option("--out", c.out, "output directory");
  if (run_flags) {
    cmd->add_flag("--force", c.force, "replace a previous run in the output directory");
    cmd->add_flag("--no-traces", c.no_traces, "do not write per-trial traces");
    cmd->add_flag("--no-sanitize", c.no_sanitize, "keep traces the sanitizer would reject");
  }
}

experiment::ExperimentConfig load(const Common& c) {
  auto cfg = c.config.empty() ? experiment::ExperimentConfig{} : experiment::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  if (c.out) cfg.output_dir = *c.out;
  if (c.no_traces) cfg.save_traces = false;
  if (c.no_sanitize) cfg.sanitize = false;
  cfg.validate();
  return cfg;
}

void print_file(const fs::path& p) {
  std::ifstream in(p);
  std::cout << in.rdbuf();
}

int run_scenario(const Common& c, experiment::Scenario s) {
  auto cfg = load(c);
  cfg.scenario = s;
  const auto dir = experiment::run_experiment(cfg, c.force);
  switch (s) {
    case experiment::Scenario::keystroke: print_file(dir / "reports" / "keystroke.txt"); break;
    case experiment::Scenario::website: print_file(dir / "reports" / "cv.txt"); break;
    case experiment::Scenario::resolution: print_file(dir / "reports" / "sweep.txt"); break;
    case experiment::Scenario::mitigation: print_file(dir / "reports" / "mitigation.txt"); break;
  }
  std::cout << "run directory: " << dir.string() << '\n';
  return kOk;
}

struct SimulateArgs {
  std::string scenario = "keystroke";
  std::string word;
  std::size_t site = 0;
  std::size_t trials = 1;
};

int simulate(const Common& c, const SimulateArgs& a) {
  const auto cfg = load(c);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  const auto scenario = experiment::parse_scenario(a.scenario);
  if (scenario == experiment::Scenario::keystroke) {
    if (a.word.empty()) throw ConfigError("simulate keystroke needs --word");
    const auto alphabet = cfg.keystroke.alphabet;
    const auto profile = scenarios::make_typist_profile(alphabet, cfg.keystroke.typist,
                                                        derive_seed(cfg.seed, streams::kTypist, 0));
    for (std::size_t k = 0; k < a.trials; ++k) {
      const auto seed = derive_seed(cfg.seed, streams::kSimulation, k);
      const auto truth = scenarios::gen_typist_events(a.word, profile, derive_seed(seed, streams::kTypist, 0));
      const auto duration = truth.events.back().t_us + static_cast<std::int64_t>(cfg.keystroke.tail_ms * 1000.0);
      const auto bundle =
          sim::run_simulation(cfg.hub, sim::keystroke_workload(truth, cfg.noise), duration, seed);
      const auto stem = out / (a.word + "-" + std::to_string(k));
      sim::save_bundle(stem, bundle);
      std::cout << stem.string() << ".trace  " << bundle.spy.records.size() << " records\n";
    }
  } else if (scenario == experiment::Scenario::website) {
    const auto sites = scenarios::generate_site_corpus(std::max(cfg.website.sites, a.site + 1),
                                                       derive_seed(cfg.seed, streams::kSites, 0), cfg.website.corpus);
    const auto& site = sites[a.site];
    const auto duration = static_cast<std::int64_t>(cfg.website.duration_ms * 1000.0);
    for (std::size_t k = 0; k < a.trials; ++k) {
      const auto seed = derive_seed(cfg.seed, streams::kSimulation, a.site * cfg.website.traces_per_site + k);
      auto traffic = scenarios::gen_web_traffic(site, duration, derive_seed(seed, streams::kTraffic, 0));
      if (cfg.website.vpn) {
        traffic = scenarios::vpn_transform(traffic, *cfg.website.vpn, derive_seed(seed, streams::kVpn, 0));
        std::erase_if(traffic.points, [&](const sim::TrafficPoint& p) { return p.t_us >= duration; });
      }
      auto w = sim::web_workload(traffic, cfg.noise, cfg.spy, cfg.nic);
      w.label = site.label;
      const auto bundle = sim::run_simulation(cfg.hub, w, duration, seed);
      const auto stem = out / (site.label + "-" + std::to_string(k));
      sim::save_bundle(stem, bundle);
      std::cout << stem.string() << ".trace  " << bundle.spy.records.size() << " records\n";
    }
  } else {
    throw ConfigError("simulate supports the keystroke and website scenarios");
  }
  return kOk;
}

std::vector<fs::path> traces_under(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".trace") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int sanitize(const Common& c, const std::string& input) {
  const auto cfg = load(c);
  const auto files = traces_under(input);
  std::vector<scenarios::TraceSummary> summaries;
  for (const auto& f : files) summaries.push_back(scenarios::TraceSummary::of(sim::load_trace(f)));
  if (summaries.empty()) throw DomainError("no .trace files under " + input);
  const auto res = scenarios::sanitize_summaries(summaries, cfg.sanitize_config);
  for (const auto& r : res.rejected) {
    std::cout << "rejected  " << files[r.index].string() << "  " << r.reason << ": " << r.detail << '\n';
  }
  std::cout << res.kept.size() << " kept, " << res.rejected.size() << " rejected\n";
  return kOk;
}

int train_hmm(const Common& c) {
  const auto cfg = load(c);
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  const auto run = experiment::profile_keystroke(cfg);
  keystroke::save_hmm(out / "hmm.json", run.model);
  scenarios::save_word_list(out / "dictionary.txt", run.dictionary);
  std::cout << "profiling trials " << run.profiling.size() << " (" << run.profiling_used << " used), label accuracy "
            << run.label_accuracy << '\n'
            << "wrote " << (out / "hmm.json").string() << " and " << (out / "dictionary.txt").string() << '\n';
  return kOk;
}

struct DecodeArgs {
  std::string model;
  std::string dictionary;
  std::string trace;
  std::vector<double> latencies;
  std::size_t top = 10;
};

int decode(const Common& c, const DecodeArgs& a) {
  const auto cfg = load(c);
  const auto model = keystroke::load_hmm(a.model);
  const auto dict = scenarios::load_word_list(a.dictionary);
  std::vector<double> obs = a.latencies;
  if (!a.trace.empty()) {
    const auto spy = sim::load_trace(a.trace);
    const auto events = keystroke::detect_key_events(spy, cfg.keystroke.detector);
    const auto presses = keystroke::press_onsets(keystroke::assign_labels(events, cfg.keystroke.detector));
    obs = keystroke::extract_digram_latencies(presses);
    std::cout << events.size() << " key events, " << presses.size() << " presses\n";
  }
  if (obs.empty()) throw ConfigError("decode needs --trace or --latencies");
  const auto ranked = keystroke::rank_dictionary(model, obs, dict);
  if (ranked.empty()) {
    std::cout << "no dictionary word of length " << obs.size() + 1 << '\n';
    return kOk;
  }
  for (std::size_t i = 0; i < std::min(a.top, ranked.entries.size()); ++i) {
    std::cout << i + 1 << "  " << ranked.entries[i].word << "  " << ranked.entries[i].log_likelihood << '\n';
  }
  return kOk;
}

int correlate(const Common& c, const std::string& trace) {
  const auto cfg = load(c);
  if (!trace.empty()) {
    fs::path stem = trace;
    stem.replace_extension();
    const auto bundle = sim::load_bundle(stem);
    if (!bundle.traffic_truth) throw IoError("no .traffic sidecar next to " + trace);
    const auto f = web::featurize(bundle.spy, cfg.website.window_ms);
    const auto bins = web::bin_traffic(*bundle.traffic_truth, cfg.website.window_ms, f.values.size());
    const auto r = web::correlate(f, bins);
    if (r.defined) {
      std::cout << "r = " << r.r << '\n';
    } else {
      std::cout << "r undefined (zero variance)\n";
    }
    return kOk;
  }
  const auto run = experiment::run_website(cfg, false);
  std::cout << experiment::correlation_report(run);
  return kOk;
}

int report(const std::vector<std::string>& runs, const std::string& out) {
  std::vector<fs::path> dirs(runs.begin(), runs.end());
  const auto tables = experiment::reproduce_tables(dirs, out);
  for (const auto& t : tables) std::cout << experiment::format_table(t) << '\n';
  std::cout << "tables written to " << out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"USB hub congestion side-channel simulator and attack toolkit", "hublab"};
  app.set_version_flag("--version", std::string("hublab ") + HUBLAB_VERSION);
  app.footer(kFooter);
  app.require_subcommand(1);

  int rc = kOk;
  std::function<int()> action;

  Common sim_c, san_c, hmm_c, dec_c, cls_c, eval_c, sweep_c, corr_c, mit_c;
  SimulateArgs sim_a;
  auto* sim = app.add_subcommand("simulate", "simulate traces for one word or one synthetic site");
  add_common(sim, sim_c, false);
  sim->add_option("--scenario", sim_a.scenario, "keystroke or website")->capture_default_str();
  sim->add_option("--word", sim_a.word, "word to type (keystroke)");
  sim->add_option("--site", sim_a.site, "site index in the corpus (website)")->capture_default_str();
  sim->add_option("--trials", sim_a.trials, "number of traces")->capture_default_str()->check(CLI::PositiveNumber);
  sim->callback([&] { action = [&] { return simulate(sim_c, sim_a); }; });

  std::string san_input;
  auto* san = app.add_subcommand("sanitize", "flag short or flat traces in a directory");
  add_common(san, san_c, false);
  san->add_option("--input", san_input, "directory searched for .trace files")->required();
  san->callback([&] { action = [&] { return sanitize(san_c, san_input); }; });

  auto* hmm = app.add_subcommand("train-hmm", "simulate the profiling phase and fit the keystroke HMM");
  add_common(hmm, hmm_c, false);
  hmm->callback([&] { action = [&] { return train_hmm(hmm_c); }; });

  DecodeArgs dec_a;
  auto* dec = app.add_subcommand("decode", "rank dictionary words for a keystroke trace or latency list");
  add_common(dec, dec_c, false);
  dec->add_option("--model", dec_a.model, "HMM file from train-hmm")->required()->check(CLI::ExistingFile);
  dec->add_option("--dictionary", dec_a.dictionary, "word list")->required()->check(CLI::ExistingFile);
  auto* trace_opt = dec->add_option("--trace", dec_a.trace, "spy trace of one typed word")->check(CLI::ExistingFile);
  dec->add_option("--latencies", dec_a.latencies, "press-to-press latencies in ms")->delimiter(',')->excludes(trace_opt);
  dec->add_option("--top", dec_a.top, "ranks to print")->capture_default_str();
  dec->callback([&] { action = [&] { return decode(dec_c, dec_a); }; });

  auto* cls = app.add_subcommand("train-classifier", "website dataset and k-fold BiLSTM evaluation");
  add_common(cls, cls_c);
  cls->callback([&] { action = [&] { return run_scenario(cls_c, experiment::Scenario::website); }; });

  auto* eval = app.add_subcommand("evaluate", "full keystroke run: profiling, attack, Top-k");
  add_common(eval, eval_c);
  eval->callback([&] { action = [&] { return run_scenario(eval_c, experiment::Scenario::keystroke); }; });

  auto* sweep = app.add_subcommand("sweep", "burst-size resolution sweep");
  add_common(sweep, sweep_c);
  sweep->callback([&] { action = [&] { return run_scenario(sweep_c, experiment::Scenario::resolution); }; });

  std::string corr_trace;
  auto* corr = app.add_subcommand("correlate", "spy features against binned victim traffic");
  add_common(corr, corr_c, false);
  corr->add_option("--trace", corr_trace, "single website trace with a .traffic sidecar")->check(CLI::ExistingFile);
  corr->callback([&] { action = [&] { return correlate(corr_c, corr_trace); }; });

  auto* mit = app.add_subcommand("mitigate", "compare arbitration policies on identical workloads");
  add_common(mit, mit_c);
  mit->callback([&] { action = [&] { return run_scenario(mit_c, experiment::Scenario::mitigation); }; });

  std::vector<std::string> rep_runs;
  std::string rep_out = "tables";
  auto* rep = app.add_subcommand("report", "assemble tables from run directories");
  rep->add_option("--runs", rep_runs, "run directories");
  rep->add_option("--out", rep_out, "directory for table files")->capture_default_str();
  rep->callback([&] { action = [&] { return report(rep_runs, rep_out); }; });

  for (auto* sub : app.get_subcommands({})) sub->footer(kFooter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    rc = action ? action() : kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return kTraining;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return rc;
}
