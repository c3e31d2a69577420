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

#include <benchmark/benchmark.h>

#include <vector>

#include "hublab/common/rng.hpp"
#include "hublab/keystroke/hmm.hpp"
#include "hublab/scenarios/dictionary.hpp"
#include "hublab/scenarios/typist.hpp"
#include "hublab/scenarios/web_traffic.hpp"
#include "hublab/sim/scheduler.hpp"
#include "hublab/sim/simulator.hpp"
#include "hublab/usb/bulk_limits.hpp"
#include "hublab/web/bilstm.hpp"

using namespace hublab;

static void BM_BulkScheduleMicroframe(benchmark::State& state) {
  Rng rng(1);
  const auto limits = usb::bulk_limits(usb::PayloadSize(512));
  const std::vector<sim::BulkDemand> demand{{1, 8}, {2, 10}, {3, 4}};
  std::size_t start = 0;
  for (auto _ : state) {
    auto a = sim::bulk_schedule_microframe(demand, limits, {}, start, rng);
    start = a.next_start;
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_BulkScheduleMicroframe);

static void BM_SimulateKeystrokeWord(benchmark::State& state) {
  const auto profile = scenarios::make_typist_profile("etaoinshrd", {}, 3);
  const auto keys = scenarios::gen_typist_events("thirst", profile, 11);
  const auto w = sim::keystroke_workload(keys);
  const std::int64_t duration = keys.events.back().t_us + 500'000;
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_simulation({}, w, duration, 5));
  state.counters["frames"] = benchmark::Counter(static_cast<double>(duration / 1000),
                                                benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_SimulateKeystrokeWord)->Unit(benchmark::kMillisecond);

static void BM_SimulateWebTrace(benchmark::State& state) {
  const auto sites = scenarios::generate_site_corpus(1, 9);
  const auto traffic = scenarios::gen_web_traffic(sites[0], 8'000'000, 4);
  const auto w = sim::web_workload(traffic);
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_simulation({}, w, 8'000'000, 5));
}
BENCHMARK(BM_SimulateWebTrace)->Unit(benchmark::kMillisecond);

static void BM_NViterbi(benchmark::State& state) {
  const std::string alphabet = "etaoinshrd";
  const auto dict = scenarios::generate_dictionary(alphabet, 1000, 2);
  const auto profile = scenarios::make_typist_profile(alphabet, {}, 3);
  std::vector<keystroke::ProfileSample> corpus;
  Rng rng(4);
  for (const auto& word : dict) {
    std::vector<double> lat;
    for (std::size_t i = 1; i < word.size(); ++i) lat.push_back(sample_lognormal_ms(profile.digram(word[i - 1], word[i]), rng));
    corpus.push_back({word, lat});
  }
  const auto model = keystroke::fit_hmm(corpus, alphabet, dict);
  const std::vector<double> obs{240, 310, 280, 390, 260, 300};
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(keystroke::n_viterbi(model, obs, n));
}
BENCHMARK(BM_NViterbi)->Arg(10)->Arg(50)->Arg(500)->Unit(benchmark::kMicrosecond);

static void BM_BiLstmLossAndGradient(benchmark::State& state) {
  const int hidden = static_cast<int>(state.range(0));
  const int len = 100;
  const auto m = web::init_bilstm(1, hidden, 20, len, 1);
  Rng rng(2);
  web::Sequence x(1, len);
  for (int t = 0; t < len; ++t) x(0, t) = rng.normal();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.parameter_count()));
  for (auto _ : state) {
    grad.setZero();
    benchmark::DoNotOptimize(web::loss_and_gradient(m, x, 3, &grad));
  }
}
BENCHMARK(BM_BiLstmLossAndGradient)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
