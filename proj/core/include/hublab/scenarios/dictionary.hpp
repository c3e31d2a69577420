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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hublab::scenarios {

inline constexpr std::size_t kMinWordLength = 4;
inline constexpr std::size_t kMaxWordLength = 10;

/// One lowercase word per line; blank lines and '#' comments skipped.
/// Throws DomainError naming the line for words outside 4..10 letters,
/// non-lowercase characters or duplicates.
std::vector<std::string> read_word_list(std::istream& in);
std::vector<std::string> load_word_list(const std::filesystem::path& path);
void save_word_list(const std::filesystem::path& path, const std::vector<std::string>& words);

/// Distinct pseudo-words over `alphabet`, lengths uniform in [min_len, max_len].
std::vector<std::string> generate_dictionary(std::string_view alphabet, std::size_t count,
                                             std::uint64_t seed,
                                             std::size_t min_len = kMinWordLength,
                                             std::size_t max_len = kMaxWordLength);

/// Smallest alphabet (in first-seen order) covering every word.
std::string alphabet_of(const std::vector<std::string>& words);

}  // namespace hublab::scenarios
