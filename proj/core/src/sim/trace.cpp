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

#include "hublab/sim/trace.hpp"

#include <string>

#include "hublab/common/error.hpp"

namespace hublab::sim {

std::int64_t TrafficTimeline::total_bytes() const {
  std::int64_t s = 0;
  for (const auto& p : points) s += p.bytes;
  return s;
}

void SpyTrace::check_invariants() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].delay_us <= 0) {
      throw DomainError("spy record " + std::to_string(i) + " has non-positive delay");
    }
    if (i > 0) {
      if (records[i].t_us <= records[i - 1].t_us) {
        throw DomainError("spy timestamps not strictly increasing at record " + std::to_string(i));
      }
      if (records[i].delay_us != records[i].t_us - records[i - 1].t_us) {
        throw DomainError("spy delay mismatch at record " + std::to_string(i));
      }
    }
  }
}

std::vector<double> SpyTrace::delays_us() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(static_cast<double>(r.delay_us));
  return out;
}

}  // namespace hublab::sim
