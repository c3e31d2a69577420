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

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hublab::keystroke {

/// One profiled word: its characters and the observed press-to-press
/// latencies (size() == word.size() - 1).
struct ProfileSample {
  std::string word;
  std::vector<double> latencies_ms;
};

struct Gaussian {
  double mean_ms = 0.0;
  double stddev_ms = 1.0;

  double log_pdf(double x) const;
};

struct HmmFitConfig {
  double stddev_floor_ms = 5.0;
  /// Pseudo-observations pulling each digram toward the pooled mean and the
  /// pooled within-digram variance.
  double shrinkage = 1.0;
};

/// Hidden states are character pairs (a, b), indexed a * K + b for an
/// alphabet of K characters. A transition (a, b) -> (b, c) exists only when
/// (b, c) is a digram some dictionary word contains.
class HmmModel {
 public:
  struct Arc {
    std::size_t to = 0;
    double prob = 0.0;
  };

  HmmModel() = default;
  HmmModel(std::string alphabet, std::vector<double> initial, std::vector<std::vector<Arc>> transitions,
           std::vector<Gaussian> emissions);

  const std::string& alphabet() const { return alphabet_; }
  std::size_t state_count() const { return emissions_.size(); }
  std::size_t state_of(char a, char b) const;  // throws DomainError
  bool has_char(char c) const;
  std::pair<char, char> digram(std::size_t state) const;

  const std::vector<double>& initial() const { return initial_; }
  const std::vector<std::vector<Arc>>& transitions() const { return transitions_; }
  const std::vector<Gaussian>& emissions() const { return emissions_; }
  double transition(std::size_t from, std::size_t to) const;  // 0 when absent

  /// Probabilities in [0,1], initial and each non-empty outgoing row sum to
  /// 1, arcs bridge on the shared character. Throws DomainError.
  void validate() const;

 private:
  std::string alphabet_;
  std::vector<double> initial_;
  std::vector<std::vector<Arc>> transitions_;
  std::vector<Gaussian> emissions_;
  std::vector<int> index_;  // char -> alphabet position or -1
};

/// Emission Gaussians from the profiling corpus (shrunk toward pooled
/// statistics, floored stddev); transitions and initial distribution from
/// dictionary character statistics with add-one smoothing over legal
/// continuations. Throws DomainError on an empty corpus or dictionary.
HmmModel fit_hmm(const std::vector<ProfileSample>& corpus, const std::string& alphabet,
                 const std::vector<std::string>& dictionary, const HmmFitConfig& cfg = {});

struct StatePath {
  std::vector<std::size_t> states;
  double log_likelihood = 0.0;

  std::string word(const HmmModel& model) const;
};

/// The n most likely state sequences for the observation sequence, best
/// first. Fewer than n when fewer feasible paths exist. Throws DomainError
/// for n == 0 or empty observations.
std::vector<StatePath> n_viterbi(const HmmModel& model, const std::vector<double>& obs_ms, std::size_t n);

/// Joint log-likelihood of the word's digram path and the observations;
/// -inf when the path is infeasible. Throws DomainError if the lengths do not
/// line up or a character is outside the alphabet.
double word_log_likelihood(const HmmModel& model, const std::string& word, const std::vector<double>& obs_ms);

struct RankedWord {
  std::string word;
  double log_likelihood = 0.0;
};

struct RankedWords {
  /// Best first; ties broken by word. Only words of length obs.size() + 1
  /// over the model alphabet take part, duplicates once.
  std::vector<RankedWord> entries;
  bool empty() const { return entries.empty(); }
  /// 1-based rank of `word`, 0 when absent.
  std::size_t rank_of(const std::string& word) const;
};

RankedWords rank_dictionary(const HmmModel& model, const std::vector<double>& obs_ms,
                            const std::vector<std::string>& dictionary);

struct TopKAccuracy {
  std::size_t k = 0;
  double accuracy = 0.0;
};

/// Fraction of trials whose true word sits within the top k of its ranking.
/// Throws DomainError on size mismatch or no trials.
std::vector<TopKAccuracy> evaluate_topk(const std::vector<RankedWords>& rankings,
                                        const std::vector<std::string>& truths,
                                        const std::vector<std::size_t>& ks = {10, 50});

void to_json(nlohmann::json& j, const HmmModel& m);
void from_json(const nlohmann::json& j, HmmModel& m);
void save_hmm(const std::filesystem::path& path, const HmmModel& m);
HmmModel load_hmm(const std::filesystem::path& path);

}  // namespace hublab::keystroke
