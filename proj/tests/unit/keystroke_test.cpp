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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"
#include "hublab/keystroke/detector.hpp"
#include "hublab/keystroke/hmm.hpp"
#include "hublab/scenarios/dictionary.hpp"
#include "hublab/scenarios/typist.hpp"
#include "hublab/sim/simulator.hpp"

using namespace hublab;
using namespace hublab::keystroke;
using sim::KeyAction;

namespace {

sim::SpyTrace trace_from_delays_ms(std::initializer_list<double> delays, std::int64_t start_us = 0) {
  sim::SpyTrace t;
  std::int64_t now = start_us;
  for (double d : delays) {
    const auto us = static_cast<std::int64_t>(std::llround(d * 1000));
    now += us;
    t.records.push_back({now, us});
  }
  t.meta.duration_us = now;
  return t;
}

sim::SpyTrace idle_with_spikes(std::int64_t duration_ms, const std::vector<std::int64_t>& spike_ms) {
  sim::SpyTrace t;
  for (std::int64_t ms = 1; ms < duration_ms; ++ms) {
    if (std::find(spike_ms.begin(), spike_ms.end(), ms) != spike_ms.end()) {
      ++ms;
      t.records.push_back({ms * 1000, 2000});
    } else {
      t.records.push_back({ms * 1000, 1000});
    }
  }
  t.meta.duration_us = duration_ms * 1000;
  return t;
}

DetectedEvent ev(std::int64_t onset_us) { return {onset_us, onset_us, 2000}; }

}  // namespace

TEST(Detector, SingleSpikeInShortTrace) {
  const auto t = trace_from_delays_ms({1.0, 1.0, 2.1, 1.0});
  const auto evs = detect_key_events(t);
  ASSERT_EQ(evs.size(), 1u);
  EXPECT_EQ(evs[0].t_us, t.records[2].t_us);
}

TEST(Detector, AdjacentSpikesMerge) {
  sim::SpyTrace t;
  t.records = {{1000, 1000}, {2000, 1000}, {4000, 2000}, {5000, 2000}, {6000, 1000}};
  t.meta.duration_us = 6000;
  const auto evs = detect_key_events(t);
  ASSERT_EQ(evs.size(), 1u);
  EXPECT_EQ(evs[0].t_us, 4000);
}

TEST(Detector, QuietTraceHasNoEvents) {
  EXPECT_TRUE(detect_key_events(trace_from_delays_ms({1.0, 1.0, 1.7, 1.0})).empty());
}

TEST(Detector, EmptyTraceRejected) { EXPECT_THROW(detect_key_events(sim::SpyTrace{}), DomainError); }

TEST(Detector, IsolatedSpikeDropped) {
  // Lone spike at 1.5 s in a 5 s trace, a companion pair at 3.0 / 3.1 s.
  const auto t = idle_with_spikes(5000, {1500, 3000, 3100});
  const auto evs = detect_key_events(t);
  ASSERT_EQ(evs.size(), 2u);
  EXPECT_EQ(evs[0].t_us, 3'001'000);
  EXPECT_EQ(evs[1].t_us, 3'101'000);

  DetectorConfig off;
  off.companion_window_ms = 0;
  EXPECT_EQ(detect_key_events(t, off).size(), 3u);
}

TEST(Detector, OnsetIsMidFrame) {
  // The key went down somewhere inside the frame before the long delay.
  const auto t = idle_with_spikes(3000, {500});
  DetectorConfig cfg;
  cfg.companion_window_ms = 0;
  const auto evs = detect_key_events(t, cfg);
  ASSERT_EQ(evs.size(), 1u);
  EXPECT_EQ(evs[0].onset_us, 499'500);
}

TEST(Detector, EveryKeystrokeAlignedWithinOneMs) {
  const auto profile = scenarios::make_typist_profile("abcdefghij", {}, 7);
  std::size_t keys = 0;
  for (std::uint64_t i = 0; keys < 1000; ++i) {
    const auto truth = scenarios::gen_typist_events("abcdefghij", profile, i);
    const auto w = sim::keystroke_workload(truth, sim::NoiseModel{});
    const auto b = sim::run_simulation({}, w, truth.events.back().t_us + 500'000, i);
    const auto evs = detect_key_events(b.spy);
    ASSERT_EQ(evs.size(), truth.events.size()) << "trial " << i;
    for (std::size_t j = 0; j < evs.size(); ++j) {
      EXPECT_GE(evs[j].delay_us, 1800);
      EXPECT_LT(std::abs(evs[j].onset_us - truth.events[j].t_us), 1000) << "trial " << i << " event " << j;
    }
    keys += truth.word.size();
  }
}

TEST(Labeling, AlternatesWithoutOverlap) {
  const auto l = assign_labels({ev(0), ev(90'000), ev(250'000), ev(340'000)});
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0].label, KeyAction::press);
  EXPECT_EQ(l[1].label, KeyAction::release);
  EXPECT_EQ(l[2].label, KeyAction::press);
  EXPECT_EQ(l[3].label, KeyAction::release);
  EXPECT_FALSE(l[1].overlap);
}

TEST(Labeling, CloseReleasePressPairSwapped) {
  // P(a) P(b) R(a) R(b): second and third events 20 ms apart.
  const auto l = assign_labels({ev(0), ev(150'000), ev(170'000), ev(260'000)});
  EXPECT_EQ(l[1].label, KeyAction::press);
  EXPECT_EQ(l[2].label, KeyAction::release);
  EXPECT_TRUE(l[1].overlap);
  EXPECT_TRUE(l[2].overlap);
  EXPECT_EQ(l[3].label, KeyAction::release);
}

TEST(Labeling, ScoresAgainstTruth) {
  sim::KeyEventTrace truth;
  truth.word = "ab";
  truth.events = {{0, KeyAction::press, 'a'},
                  {150'000, KeyAction::press, 'b'},
                  {170'000, KeyAction::release, 'a'},
                  {260'000, KeyAction::release, 'b'}};
  const auto rep = label_events({ev(300), ev(150'400), ev(170'200), ev(260'100)}, truth);
  EXPECT_EQ(rep.correct, 4u);
  EXPECT_DOUBLE_EQ(rep.accuracy, 1.0);
  EXPECT_EQ(rep.overlaps_flagged, 2u);
}

TEST(Labeling, EmptyInputFlagged) {
  sim::KeyEventTrace truth;
  truth.events = {{0, KeyAction::press, 'a'}};
  const auto rep = label_events({}, truth);
  EXPECT_TRUE(rep.empty_input);
  EXPECT_EQ(rep.accuracy, 0.0);
}

TEST(DetectionScore, PrecisionRecallF1) {
  sim::KeyEventTrace truth;
  truth.events = {{10'000, KeyAction::press, 'a'}, {100'000, KeyAction::release, 'a'}};
  const auto s = score_detection({ev(10'500), ev(50'000), ev(100'200)}, truth);
  EXPECT_EQ(s.true_positives, 2u);
  EXPECT_DOUBLE_EQ(s.precision(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall(), 1.0);
  EXPECT_DOUBLE_EQ(s.f1(), 0.8);
  EXPECT_DOUBLE_EQ(score_detection({}, truth).f1(), 0.0);
}

TEST(DigramLatency, ZeroVarianceTypistRecoversMeans) {
  scenarios::TypistCalibration cal;
  cal.latency_cv = 0;
  cal.hold_time = {80, 0};
  cal.overlap_rate = 0;
  const auto profile = scenarios::make_typist_profile("etaoinshrd", cal, 4);
  const std::string word = "threads";
  const auto truth = scenarios::gen_typist_events(word, profile, 1);
  const auto w = sim::keystroke_workload(truth, sim::NoiseModel{0});
  const auto b = sim::run_simulation({}, w, truth.events.back().t_us + 500'000, 1);
  const auto lat = extract_digram_latencies(press_onsets(assign_labels(detect_key_events(b.spy))));
  ASSERT_EQ(lat.size(), word.size() - 1);
  for (std::size_t i = 0; i + 1 < word.size(); ++i) {
    EXPECT_NEAR(lat[i], profile.digram(word[i], word[i + 1]).mean_ms, 1.0) << i;
  }
}

TEST(DigramLatency, PressDifferences) {
  const auto l = extract_digram_latencies({1'000'000, 1'200'000, 1'450'500});
  ASSERT_EQ(l.size(), 2u);
  EXPECT_DOUBLE_EQ(l[0], 200.0);
  EXPECT_DOUBLE_EQ(l[1], 250.5);
  EXPECT_THROW(extract_digram_latencies({5}), DomainError);
  EXPECT_THROW(extract_digram_latencies({5, 5}), DomainError);
}

// ---- HMM ---------------------------------------------------------------

TEST(Hmm, SingleSampleEmissionMean) {
  const auto m = fit_hmm({{"ab", {200.0}}}, "ab", {"ab"});
  EXPECT_DOUBLE_EQ(m.emissions()[m.state_of('a', 'b')].mean_ms, 200.0);
  EXPECT_GE(m.emissions()[m.state_of('a', 'b')].stddev_ms, 5.0);
}

TEST(Hmm, TransitionsMatchHandCounts) {
  const std::vector<std::string> dict = {"abc", "abca", "bca", "cab", "abb"};
  const auto m = fit_hmm({{"ab", {100.0}}}, "abc", dict);

  // Oracle: legal digrams and trigram counts tallied directly.
  std::map<std::string, int> legal, tri, first;
  for (const auto& w : dict) {
    first[w.substr(0, 2)]++;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) legal[w.substr(i, 2)]++;
    for (std::size_t i = 0; i + 2 < w.size(); ++i) tri[w.substr(i, 3)]++;
  }
  const std::string abc = "abc";
  for (char a : abc) {
    for (char b : abc) {
      double denom = 0;
      for (char c : abc) {
        if (legal.count(std::string{b, c})) denom += tri[std::string{a, b, c}] + 1;
      }
      for (char c : abc) {
        const double want = legal.count(std::string{b, c}) ? (tri[std::string{a, b, c}] + 1) / denom : 0.0;
        EXPECT_NEAR(m.transition(m.state_of(a, b), m.state_of(b, c)), want, 1e-12)
            << a << b << "->" << b << c;
      }
    }
  }
  // First digrams: ab x3, bc, ca -> (4, 2, 2) / 8.
  EXPECT_DOUBLE_EQ(m.initial()[m.state_of('a', 'b')], 0.5);
  EXPECT_DOUBLE_EQ(m.initial()[m.state_of('b', 'c')], 0.25);
  EXPECT_DOUBLE_EQ(m.initial()[m.state_of('c', 'a')], 0.25);
  EXPECT_DOUBLE_EQ(m.initial()[m.state_of('a', 'a')], 0.0);
}

TEST(Hmm, RandomFitsAreStochastic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<std::string> dict;
    std::vector<ProfileSample> corpus;
    for (int i = 0; i < 30; ++i) {
      std::string w;
      const auto len = rng.between(2, 6);
      for (std::int64_t j = 0; j < len; ++j) w.push_back(static_cast<char>('a' + rng.below(4)));
      dict.push_back(w);
      std::vector<double> lat;
      for (std::int64_t j = 1; j < len; ++j) lat.push_back(rng.uniform(100, 300));
      corpus.push_back({w, lat});
    }
    const auto m = fit_hmm(corpus, "abcd", dict);
    EXPECT_NO_THROW(m.validate());
    for (std::size_t s = 0; s < m.state_count(); ++s) {
      for (const auto& a : m.transitions()[s]) EXPECT_EQ(m.digram(s).second, m.digram(a.to).first);
    }
  }
}

TEST(Hmm, RejectsBadInput) {
  EXPECT_THROW(fit_hmm({}, "ab", {"ab"}), DomainError);
  EXPECT_THROW(fit_hmm({{"abc", {1.0}}}, "abc", {"abc"}), DomainError);
  EXPECT_THROW(fit_hmm({{"ab", {1.0}}}, "ab", {"xy"}), DomainError);
}

namespace {

HmmModel random_model(std::uint64_t seed, const std::string& alphabet) {
  Rng rng(seed);
  const std::size_t k = alphabet.size();
  const std::size_t n = k * k;
  std::vector<double> init(n);
  double tot = 0;
  for (auto& p : init) tot += (p = rng.uniform(0.1, 1.0));
  for (auto& p : init) p /= tot;
  std::vector<std::vector<HmmModel::Arc>> trans(n);
  for (std::size_t s = 0; s < n; ++s) {
    double row = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (rng.bernoulli(0.2)) continue;  // some illegal continuations
      const double w = rng.uniform(0.1, 1.0);
      trans[s].push_back({(s % k) * k + c, w});
      row += w;
    }
    for (auto& a : trans[s]) a.prob /= row;
  }
  std::vector<Gaussian> em(n);
  for (auto& g : em) g = {rng.uniform(100, 400), rng.uniform(10, 60)};
  return HmmModel(alphabet, init, trans, em);
}

struct BrutePath {
  std::vector<std::size_t> states;
  double ll;
};

std::vector<BrutePath> brute_force(const HmmModel& m, const std::vector<double>& obs) {
  const std::size_t n = m.state_count();
  std::vector<BrutePath> all;
  std::vector<std::size_t> cur(obs.size(), 0);
  while (true) {
    double ll = std::log(m.initial()[cur[0]]) + m.emissions()[cur[0]].log_pdf(obs[0]);
    for (std::size_t t = 1; t < obs.size(); ++t) {
      ll += std::log(m.transition(cur[t - 1], cur[t])) + m.emissions()[cur[t]].log_pdf(obs[t]);
    }
    if (std::isfinite(ll)) all.push_back({cur, ll});
    std::size_t t = 0;
    while (t < cur.size() && ++cur[t] == n) cur[t++] = 0;
    if (t == cur.size()) break;
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.ll > b.ll; });
  return all;
}

}  // namespace

TEST(NViterbi, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = random_model(seed, "abc");
    Rng rng(seed + 100);
    std::vector<double> obs;
    for (int i = 0; i < 4; ++i) obs.push_back(rng.uniform(100, 400));
    const auto brute = brute_force(m, obs);
    const auto got = n_viterbi(m, obs, 25);
    ASSERT_EQ(got.size(), std::min<std::size_t>(25, brute.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i].log_likelihood, brute[i].ll, 1e-9) << "seed " << seed << " rank " << i;
      EXPECT_EQ(got[i].states, brute[i].states) << "seed " << seed << " rank " << i;
    }
  }
}

TEST(NViterbi, ShorterListIsPrefix) {
  const auto m = random_model(3, "abcd");
  const std::vector<double> obs = {150, 220, 310, 180, 260};
  const auto big = n_viterbi(m, obs, 40);
  for (std::size_t n : {1u, 5u, 17u}) {
    const auto small = n_viterbi(m, obs, n);
    ASSERT_EQ(small.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(small[i].states, big[i].states);
  }
  for (std::size_t i = 1; i < big.size(); ++i) EXPECT_GE(big[i - 1].log_likelihood, big[i].log_likelihood);
}

TEST(NViterbi, BestPathIsPlainViterbi) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_model(seed + 50, "abcd");
    Rng rng(seed);
    std::vector<double> obs;
    for (int i = 0; i < 6; ++i) obs.push_back(rng.uniform(100, 400));
    // Textbook single-best Viterbi.
    const std::size_t ns = m.state_count();
    std::vector<double> score(ns);
    std::vector<std::vector<std::size_t>> back(obs.size(), std::vector<std::size_t>(ns, 0));
    for (std::size_t s = 0; s < ns; ++s) score[s] = std::log(m.initial()[s]) + m.emissions()[s].log_pdf(obs[0]);
    for (std::size_t t = 1; t < obs.size(); ++t) {
      std::vector<double> next(ns, -INFINITY);
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t p = 0; p < ns; ++p) {
          const double v = score[p] + std::log(m.transition(p, s));
          if (v > next[s]) {
            next[s] = v;
            back[t][s] = p;
          }
        }
        next[s] += m.emissions()[s].log_pdf(obs[t]);
      }
      score = next;
    }
    std::size_t best = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
    std::vector<std::size_t> path(obs.size());
    for (std::size_t t = obs.size(); t-- > 0;) {
      path[t] = best;
      best = back[t][best];
    }
    const auto got = n_viterbi(m, obs, 1);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].states, path);
  }
}

TEST(NViterbi, ReturnsAllWhenFewPathsExist) {
  // Two characters, only "ab" then "ba" legal: a single feasible path of any length.
  const auto m = fit_hmm({{"ab", {200.0}}}, "ab", {"aba"});
  const auto paths = n_viterbi(m, {200.0, 200.0, 200.0}, 10);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].word(m), "abab");
  EXPECT_THROW(n_viterbi(m, {}, 10), DomainError);
  EXPECT_THROW(n_viterbi(m, {200.0}, 0), DomainError);
}

TEST(RankDictionary, TrueWordFirstAtDigramMeans) {
  const std::string alphabet = "abcdef";
  const std::vector<std::string> dict = {"abcd", "fedc", "acef", "bdfa", "cafe", "deaf", "face", "beef"};
  std::vector<ProfileSample> corpus;
  Rng rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    for (const auto& w : dict) {
      std::vector<double> lat;
      for (std::size_t i = 0; i + 1 < w.size(); ++i) lat.push_back(100.0 + 25.0 * (6 * (w[i] - 'a') + (w[i + 1] - 'a')));
      corpus.push_back({w, lat});
    }
  }
  const auto m = fit_hmm(corpus, alphabet, dict);
  for (const auto& w : dict) {
    std::vector<double> obs;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) obs.push_back(m.emissions()[m.state_of(w[i], w[i + 1])].mean_ms);
    const auto r = rank_dictionary(m, obs, dict);
    ASSERT_FALSE(r.empty());
    EXPECT_EQ(r.entries[0].word, w);
    EXPECT_EQ(r.rank_of(w), 1u);
  }
  EXPECT_TRUE(rank_dictionary(m, {100.0}, dict).empty());  // no 2-letter words
}

TEST(RankDictionary, TiesBrokenByWord) {
  const auto m = fit_hmm({{"ab", {200.0}}, {"ba", {200.0}}}, "ab", {"ab", "ba"});
  const auto r = rank_dictionary(m, {200.0}, {"ba", "ab"});
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].word, "ab");
}

TEST(RankDictionary, HandComputedGaussianSums) {
  const std::vector<std::string> dict = {"abc", "acb", "bca", "cab", "cba"};
  std::vector<ProfileSample> corpus;
  for (const auto& w : dict) corpus.push_back({w, {120.0 + 10 * (w[0] - 'a'), 260.0 - 30 * (w[2] - 'a')}});
  const auto m = fit_hmm(corpus, "abc", dict);
  const std::vector<double> obs = {131.0, 244.0};

  std::vector<std::pair<double, std::string>> want;
  for (const auto& w : dict) {
    double ll = std::log(m.initial()[m.state_of(w[0], w[1])]);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& g = m.emissions()[m.state_of(w[i], w[i + 1])];
      const double z = (obs[i] - g.mean_ms) / g.stddev_ms;
      ll += -0.5 * z * z - std::log(g.stddev_ms * std::sqrt(2 * M_PI));
    }
    ll += std::log(m.transition(m.state_of(w[0], w[1]), m.state_of(w[1], w[2])));
    want.push_back({-ll, w});
  }
  std::sort(want.begin(), want.end());
  const auto r = rank_dictionary(m, obs, dict);
  ASSERT_EQ(r.entries.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(r.entries[i].word, want[i].second);
    EXPECT_NEAR(r.entries[i].log_likelihood, -want[i].first, 1e-9);
  }
  const auto single = rank_dictionary(m, obs, {"abc", "abcd"});
  ASSERT_EQ(single.entries.size(), 1u);
  EXPECT_EQ(single.entries[0].word, "abc");
}

TEST(RankDictionary, ShrinkingDictionaryNeverHurtsTopK) {
  const auto dict = scenarios::generate_dictionary("abcdef", 200, 3, 4, 6);
  std::vector<ProfileSample> corpus;
  Rng rng(9);
  for (const auto& w : dict) {
    std::vector<double> lat;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) lat.push_back(rng.uniform(150, 350));
    corpus.push_back({w, lat});
  }
  const auto m = fit_hmm(corpus, "abcdef", dict);
  for (std::size_t trial = 0; trial < 30; ++trial) {
    const auto& truth = dict[trial * 5];
    std::vector<double> obs;
    for (std::size_t i = 0; i + 1 < truth.size(); ++i) obs.push_back(rng.uniform(150, 350));
    std::vector<std::string> smaller;
    for (std::size_t i = 0; i < dict.size(); ++i) {
      if (dict[i] == truth || rng.bernoulli(0.5)) smaller.push_back(dict[i]);
    }
    EXPECT_LE(rank_dictionary(m, obs, smaller).rank_of(truth), rank_dictionary(m, obs, dict).rank_of(truth));
  }
}

TEST(TopK, HandExample) {
  RankedWords r1, r2, r3;
  r1.entries = {{"x", 0}, {"y", -1}};
  r2.entries = {{"y", 0}, {"x", -1}};
  r3.entries = {{"z", 0}};
  const auto acc = evaluate_topk({r1, r2, r3}, {"x", "x", "x"}, {1, 2});
  EXPECT_DOUBLE_EQ(acc[0].accuracy, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(acc[1].accuracy, 2.0 / 3.0);
  EXPECT_THROW(evaluate_topk({}, {}, {1}), DomainError);
}

TEST(Hmm, JsonRoundTrip) {
  const auto m = random_model(5, "abc");
  const nlohmann::json j = m;
  const auto back = j.get<HmmModel>();
  EXPECT_EQ(nlohmann::json(back).dump(), j.dump());
  nlohmann::json bad = j;
  bad["initial"][0] = 5.0;
  EXPECT_THROW(bad.get<HmmModel>(), DomainError);
}
