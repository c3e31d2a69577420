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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hublab {

double mean(std::span<const double> xs);
double stddev(std::span<const double> xs);  // population
double median(std::vector<double> xs);      // by value: partially sorts
double median_abs_deviation(std::span<const double> xs);

/// FNV-1a, 64-bit. Used for config and hub digests in trace metadata.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal for a double ("%.17g" trimmed). Every number
/// written to model and report files goes through this so reruns are
/// byte-identical.
std::string format_double(double v);

}  // namespace hublab
