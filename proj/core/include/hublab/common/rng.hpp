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
#include <random>

namespace hublab {

/// SplitMix64 finalizer. Used to turn (master seed, stream, counter) triples
/// into independent 64-bit seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation: seed = mix(mix(master ^ mix(stream)) + index).
/// A trial's seed depends only on (master, stream, index), so any subset of
/// trials can be regenerated without replaying the others.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

/// Named stream identifiers for derive_seed.
namespace streams {
inline constexpr std::uint64_t kTypist = 1;
inline constexpr std::uint64_t kTraffic = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kPolicy = 4;
inline constexpr std::uint64_t kDictionary = 5;
inline constexpr std::uint64_t kSites = 6;
inline constexpr std::uint64_t kSimulation = 7;
inline constexpr std::uint64_t kModel = 8;
inline constexpr std::uint64_t kFolds = 9;
inline constexpr std::uint64_t kVpn = 10;
inline constexpr std::uint64_t kFaults = 11;
}  // namespace streams

/// Thin wrapper over mt19937_64. The distribution transforms are written out
/// here instead of using <random> distributions, whose output is
/// implementation-defined; traces must be bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (one value per call; the pair's second
  /// half is cached).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hublab
