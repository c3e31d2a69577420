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

#include "hublab/scenarios/dictionary.hpp"

#include <fstream>
#include <istream>
#include <unordered_set>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"

namespace hublab::scenarios {

std::vector<std::string> read_word_list(std::istream& in) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "word list line " + std::to_string(line_no) + ": ";
    if (line.size() < kMinWordLength || line.size() > kMaxWordLength) {
      throw DomainError(where + "'" + line + "' is not 4-10 letters long");
    }
    for (char c : line) {
      if (c < 'a' || c > 'z') throw DomainError(where + "'" + line + "' is not lowercase a-z");
    }
    if (!seen.insert(line).second) throw DomainError(where + "duplicate word '" + line + "'");
    words.push_back(line);
  }
  return words;
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read word list " + path.string());
  return read_word_list(in);
}

void save_word_list(const std::filesystem::path& path, const std::vector<std::string>& words) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write word list " + path.string());
  for (const auto& w : words) out << w << '\n';
}

std::vector<std::string> generate_dictionary(std::string_view alphabet, std::size_t count,
                                             std::uint64_t seed, std::size_t min_len,
                                             std::size_t max_len) {
  if (alphabet.empty() || min_len == 0 || max_len < min_len) {
    throw DomainError("generate_dictionary: bad alphabet or length range");
  }
  Rng rng(seed);
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  std::size_t attempts = 0;
  while (words.size() < count) {
    if (++attempts > 100 * count + 1000) {
      throw DomainError("generate_dictionary: cannot draw enough distinct words");
    }
    const auto len = static_cast<std::size_t>(
        rng.between(static_cast<std::int64_t>(min_len), static_cast<std::int64_t>(max_len)));
    std::string w(len, ' ');
    for (auto& c : w) c = alphabet[rng.below(alphabet.size())];
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

std::string alphabet_of(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    for (char c : w) {
      if (out.find(c) == std::string::npos) out.push_back(c);
    }
  }
  return out;
}

}  // namespace hublab::scenarios
