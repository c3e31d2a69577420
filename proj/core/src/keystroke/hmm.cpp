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

#include "hublab/keystroke/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "hublab/common/error.hpp"

namespace hublab::keystroke {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSumTolerance = 1e-9;

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

std::vector<int> build_index(const std::string& alphabet) {
  std::vector<int> idx(256, -1);
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    auto& slot = idx[static_cast<unsigned char>(alphabet[i])];
    if (slot >= 0) throw DomainError(std::string("duplicate character '") + alphabet[i] + "' in alphabet");
    slot = static_cast<int>(i);
  }
  return idx;
}

}  // namespace

double Gaussian::log_pdf(double x) const {
  const double z = (x - mean_ms) / stddev_ms;
  return -0.5 * z * z - std::log(stddev_ms) - 0.5 * std::log(2.0 * std::numbers::pi);
}

HmmModel::HmmModel(std::string alphabet, std::vector<double> initial,
                   std::vector<std::vector<Arc>> transitions, std::vector<Gaussian> emissions)
    : alphabet_(std::move(alphabet)),
      initial_(std::move(initial)),
      transitions_(std::move(transitions)),
      emissions_(std::move(emissions)),
      index_(build_index(alphabet_)) {
  validate();
}

bool HmmModel::has_char(char c) const {
  return !index_.empty() && index_[static_cast<unsigned char>(c)] >= 0;
}

std::size_t HmmModel::state_of(char a, char b) const {
  if (!has_char(a) || !has_char(b)) {
    throw DomainError(std::string("digram '") + a + b + "' outside the model alphabet");
  }
  return static_cast<std::size_t>(index_[static_cast<unsigned char>(a)]) * alphabet_.size() +
         static_cast<std::size_t>(index_[static_cast<unsigned char>(b)]);
}

std::pair<char, char> HmmModel::digram(std::size_t state) const {
  const std::size_t k = alphabet_.size();
  return {alphabet_[state / k], alphabet_[state % k]};
}

double HmmModel::transition(std::size_t from, std::size_t to) const {
  for (const auto& a : transitions_[from]) {
    if (a.to == to) return a.prob;
  }
  return 0.0;
}

void HmmModel::validate() const {
  const std::size_t k = alphabet_.size();
  const std::size_t n = k * k;
  if (k == 0) throw DomainError("model alphabet is empty");
  if (initial_.size() != n || transitions_.size() != n || emissions_.size() != n) {
    throw DomainError("model tables do not match alphabet size");
  }
  double init_sum = 0.0;
  for (double p : initial_) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("initial probability outside [0,1]");
    init_sum += p;
  }
  if (std::abs(init_sum - 1.0) > kSumTolerance) throw DomainError("initial distribution does not sum to 1");
  for (std::size_t s = 0; s < n; ++s) {
    double sum = 0.0;
    for (const auto& a : transitions_[s]) {
      if (a.to >= n) throw DomainError("transition target out of range");
      if (!(a.prob >= 0.0 && a.prob <= 1.0)) throw DomainError("transition probability outside [0,1]");
      if (s % k != a.to / k) throw DomainError("transition does not share the bridging character");
      sum += a.prob;
    }
    if (!transitions_[s].empty() && std::abs(sum - 1.0) > kSumTolerance) {
      throw DomainError("transition row does not sum to 1");
    }
    if (!(emissions_[s].stddev_ms > 0.0) || !std::isfinite(emissions_[s].mean_ms)) {
      throw DomainError("emission needs finite mean and positive stddev");
    }
  }
}

HmmModel fit_hmm(const std::vector<ProfileSample>& corpus, const std::string& alphabet,
                 const std::vector<std::string>& dictionary, const HmmFitConfig& cfg) {
  if (corpus.empty()) throw DomainError("profiling corpus is empty");
  if (!(cfg.stddev_floor_ms > 0.0) || !(cfg.shrinkage >= 0.0)) {
    throw DomainError("stddev floor must be > 0 and shrinkage >= 0");
  }
  const auto idx = build_index(alphabet);
  const std::size_t k = alphabet.size();
  const std::size_t n = k * k;
  auto in_alphabet = [&](const std::string& w) {
    return std::all_of(w.begin(), w.end(), [&](char c) { return idx[static_cast<unsigned char>(c)] >= 0; });
  };
  auto state = [&](char a, char b) {
    return static_cast<std::size_t>(idx[static_cast<unsigned char>(a)]) * k +
           static_cast<std::size_t>(idx[static_cast<unsigned char>(b)]);
  };

  // Emissions.
  std::vector<std::vector<double>> obs(n);
  std::vector<double> pooled;
  for (const auto& s : corpus) {
    if (s.word.size() < 2 || s.latencies_ms.size() + 1 != s.word.size()) {
      throw DomainError("profile sample '" + s.word + "' has mismatched latency count");
    }
    if (!in_alphabet(s.word)) throw DomainError("profile sample '" + s.word + "' outside the alphabet");
    for (std::size_t i = 0; i + 1 < s.word.size(); ++i) {
      obs[state(s.word[i], s.word[i + 1])].push_back(s.latencies_ms[i]);
      pooled.push_back(s.latencies_ms[i]);
    }
  }
  // Means shrink toward the pooled mean, variances toward the pooled
  // within-digram variance. Unseen digrams get the overall spread.
  double pool_mean = 0.0;
  for (double x : pooled) pool_mean += x;
  pool_mean /= static_cast<double>(pooled.size());
  double pool_var = 0.0;
  for (double x : pooled) pool_var += (x - pool_mean) * (x - pool_mean);
  pool_var /= static_cast<double>(pooled.size());

  std::vector<double> means(n, 0.0), vars(n, 0.0);
  double within = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (obs[s].empty()) continue;
    for (double x : obs[s]) means[s] += x;
    means[s] /= static_cast<double>(obs[s].size());
    for (double x : obs[s]) vars[s] += (x - means[s]) * (x - means[s]);
    within += vars[s];
    vars[s] /= static_cast<double>(obs[s].size());
  }
  within /= static_cast<double>(pooled.size());

  std::vector<Gaussian> emissions(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto cnt = static_cast<double>(obs[s].size());
    double mean = pool_mean;
    double var = pool_var;
    if (cnt > 0) {
      const double w = cnt + cfg.shrinkage;
      mean = (cnt * means[s] + cfg.shrinkage * pool_mean) / w;
      var = (cnt * vars[s] + cfg.shrinkage * within) / w;
    }
    emissions[s] = {mean, std::max(std::sqrt(var), cfg.stddev_floor_ms)};
  }

  // Dictionary character statistics.
  std::vector<bool> legal(n, false);
  std::vector<double> first(n, 0.0);
  std::map<std::pair<std::size_t, std::size_t>, double> trigram;
  std::size_t usable = 0;
  for (const auto& w : dictionary) {
    if (w.size() < 2 || !in_alphabet(w)) continue;
    ++usable;
    first[state(w[0], w[1])] += 1.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) legal[state(w[i], w[i + 1])] = true;
    for (std::size_t i = 0; i + 2 < w.size(); ++i) {
      trigram[{state(w[i], w[i + 1]), state(w[i + 1], w[i + 2])}] += 1.0;
    }
  }
  if (usable == 0) throw DomainError("dictionary has no words over the alphabet");

  std::vector<double> initial(n, 0.0);
  double init_total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (first[s] > 0.0) init_total += first[s] + 1.0;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (first[s] > 0.0) initial[s] = (first[s] + 1.0) / init_total;
  }

  std::vector<std::vector<HmmModel::Arc>> transitions(n);
  for (std::size_t from = 0; from < n; ++from) {
    const std::size_t b = from % k;
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t to = b * k + c;
      if (!legal[to]) continue;
      const auto it = trigram.find({from, to});
      const double cnt = (it == trigram.end() ? 0.0 : it->second) + 1.0;
      transitions[from].push_back({to, cnt});
      total += cnt;
    }
    for (auto& a : transitions[from]) a.prob /= total;
  }
  return HmmModel(alphabet, std::move(initial), std::move(transitions), std::move(emissions));
}

std::string StatePath::word(const HmmModel& model) const {
  std::string w;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto [a, b] = model.digram(states[i]);
    if (i == 0) w.push_back(a);
    w.push_back(b);
  }
  return w;
}

std::vector<StatePath> n_viterbi(const HmmModel& model, const std::vector<double>& obs_ms, std::size_t n) {
  if (n == 0) throw DomainError("n-Viterbi needs n >= 1");
  if (obs_ms.empty()) throw DomainError("n-Viterbi needs at least one observation");
  const std::size_t ns = model.state_count();

  struct Entry {
    double score;
    std::size_t prev_state;
    std::size_t prev_rank;
  };
  auto better = [](const Entry& x, const Entry& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.prev_state != y.prev_state) return x.prev_state < y.prev_state;
    return x.prev_rank < y.prev_rank;
  };

  std::vector<std::vector<std::pair<std::size_t, double>>> preds(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    for (const auto& a : model.transitions()[s]) {
      if (a.prob > 0.0) preds[a.to].push_back({s, std::log(a.prob)});
    }
  }

  const std::size_t len = obs_ms.size();
  std::vector<std::vector<std::vector<Entry>>> lists(len, std::vector<std::vector<Entry>>(ns));
  for (std::size_t s = 0; s < ns; ++s) {
    if (model.initial()[s] > 0.0) {
      lists[0][s].push_back(
          {std::log(model.initial()[s]) + model.emissions()[s].log_pdf(obs_ms[0]), 0, 0});
    }
  }
  std::vector<Entry> cand;
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t s = 0; s < ns; ++s) {
      cand.clear();
      const double e = model.emissions()[s].log_pdf(obs_ms[t]);
      for (const auto& [p, lt] : preds[s]) {
        const auto& prev = lists[t - 1][p];
        for (std::size_t r = 0; r < prev.size(); ++r) cand.push_back({prev[r].score + lt + e, p, r});
      }
      const std::size_t keep = std::min(n, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(), better);
      lists[t][s].assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep));
    }
  }

  // Final ranking across end states: prev_state holds the end state here.
  cand.clear();
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& l = lists[len - 1][s];
    for (std::size_t r = 0; r < l.size(); ++r) cand.push_back({l[r].score, s, r});
  }
  const std::size_t keep = std::min(n, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(), better);

  std::vector<StatePath> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    StatePath path;
    path.log_likelihood = cand[i].score;
    path.states.resize(len);
    std::size_t s = cand[i].prev_state;
    std::size_t r = cand[i].prev_rank;
    for (std::size_t t = len; t-- > 0;) {
      path.states[t] = s;
      const Entry& en = lists[t][s][r];
      s = en.prev_state;
      r = en.prev_rank;
    }
    out.push_back(std::move(path));
  }
  return out;
}

double word_log_likelihood(const HmmModel& model, const std::string& word, const std::vector<double>& obs_ms) {
  if (word.size() != obs_ms.size() + 1) {
    throw DomainError("word '" + word + "' does not match " + std::to_string(obs_ms.size()) + " observations");
  }
  std::size_t s = model.state_of(word[0], word[1]);
  double ll = safe_log(model.initial()[s]) + model.emissions()[s].log_pdf(obs_ms[0]);
  for (std::size_t i = 1; i < obs_ms.size(); ++i) {
    const std::size_t next = model.state_of(word[i], word[i + 1]);
    ll += safe_log(model.transition(s, next)) + model.emissions()[next].log_pdf(obs_ms[i]);
    s = next;
  }
  return ll;
}

std::size_t RankedWords::rank_of(const std::string& word) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].word == word) return i + 1;
  }
  return 0;
}

RankedWords rank_dictionary(const HmmModel& model, const std::vector<double>& obs_ms,
                            const std::vector<std::string>& dictionary) {
  RankedWords out;
  if (obs_ms.empty()) return out;
  std::set<std::string> seen;
  for (const auto& w : dictionary) {
    if (w.size() != obs_ms.size() + 1) continue;
    if (!seen.insert(w).second) continue;
    if (!std::all_of(w.begin(), w.end(), [&](char c) { return model.has_char(c); })) continue;
    out.entries.push_back({w, word_log_likelihood(model, w, obs_ms)});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedWord& a, const RankedWord& b) {
    if (a.log_likelihood != b.log_likelihood) return a.log_likelihood > b.log_likelihood;
    return a.word < b.word;
  });
  return out;
}

std::vector<TopKAccuracy> evaluate_topk(const std::vector<RankedWords>& rankings,
                                        const std::vector<std::string>& truths,
                                        const std::vector<std::size_t>& ks) {
  if (rankings.size() != truths.size()) throw DomainError("rankings and truths differ in size");
  if (rankings.empty()) throw DomainError("no trials to evaluate");
  std::vector<std::size_t> ranks(rankings.size());
  for (std::size_t i = 0; i < rankings.size(); ++i) ranks[i] = rankings[i].rank_of(truths[i]);
  std::vector<TopKAccuracy> out;
  for (std::size_t k : ks) {
    if (k == 0) throw DomainError("k must be >= 1");
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r >= 1 && r <= k; });
    out.push_back({k, static_cast<double>(hits) / static_cast<double>(ranks.size())});
  }
  return out;
}

void to_json(nlohmann::json& j, const HmmModel& m) {
  nlohmann::json trans = nlohmann::json::array();
  for (const auto& row : m.transitions()) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& a : row) r.push_back({a.to, a.prob});
    trans.push_back(std::move(r));
  }
  nlohmann::json em = nlohmann::json::array();
  for (const auto& g : m.emissions()) em.push_back({g.mean_ms, g.stddev_ms});
  j = {{"format", "hublab-hmm/1"},
       {"alphabet", m.alphabet()},
       {"initial", m.initial()},
       {"transitions", std::move(trans)},
       {"emissions", std::move(em)}};
}

void from_json(const nlohmann::json& j, HmmModel& m) {
  try {
    std::vector<std::vector<HmmModel::Arc>> trans;
    for (const auto& row : j.at("transitions")) {
      auto& r = trans.emplace_back();
      for (const auto& a : row) r.push_back({a.at(0).get<std::size_t>(), a.at(1).get<double>()});
    }
    std::vector<Gaussian> em;
    for (const auto& g : j.at("emissions")) em.push_back({g.at(0).get<double>(), g.at(1).get<double>()});
    m = HmmModel(j.at("alphabet").get<std::string>(), j.at("initial").get<std::vector<double>>(),
                 std::move(trans), std::move(em));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed HMM model: ") + e.what());
  }
}

void save_hmm(const std::filesystem::path& path, const HmmModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << nlohmann::json(m).dump(1) << '\n';
}

HmmModel load_hmm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed HMM model " + path.string() + ": " + e.what());
  }
  return j.get<HmmModel>();
}

}  // namespace hublab::keystroke
