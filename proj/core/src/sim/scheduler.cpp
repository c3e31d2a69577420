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

#include "hublab/sim/scheduler.hpp"

#include <algorithm>
#include <numeric>

namespace hublab::sim {
namespace {

int role_rank(InterruptRole r) {
  switch (r) {
    case InterruptRole::keyboard: return 0;
    case InterruptRole::mouse: return 1;
    case InterruptRole::other: return 2;
  }
  return 2;
}

bool fair_before(const InterruptTransaction& a, const InterruptTransaction& b) {
  if (a.arrival_frame != b.arrival_frame) return a.arrival_frame < b.arrival_frame;
  if (role_rank(a.role) != role_rank(b.role)) return role_rank(a.role) < role_rank(b.role);
  return a.seq < b.seq;
}

}  // namespace

FrameSchedule tt_schedule_frame(std::span<const InterruptTransaction> pending,
                                const usb::ArbitrationPolicy& policy, const TtFrameContext& ctx,
                                Rng& rng) {
  FrameSchedule out;
  std::vector<InterruptTransaction> queue(pending.begin(), pending.end());
  const auto capacity = static_cast<std::size_t>(std::max<std::int64_t>(ctx.capacity, 0));

  switch (policy.kind) {
    case usb::ArbitrationKind::fair_round_robin:
      std::stable_sort(queue.begin(), queue.end(), fair_before);
      break;
    case usb::ArbitrationKind::unfair_priority:
      std::stable_sort(queue.begin(), queue.end(), [&](const auto& a, const auto& b) {
        const auto ra = policy.priority_rank(a.device);
        const auto rb = policy.priority_rank(b.device);
        if (ra != rb) return ra < rb;
        return fair_before(a, b);
      });
      break;
    case usb::ArbitrationKind::randomized_allocation: {
      std::stable_sort(queue.begin(), queue.end(), fair_before);
      std::vector<DeviceId> candidates(ctx.connected.begin(), ctx.connected.end());
      if (candidates.empty()) {
        for (const auto& t : queue) candidates.push_back(t.device);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      }
      std::vector<bool> taken(queue.size(), false);
      for (std::size_t g = 0; g < capacity && !candidates.empty(); ++g) {
        const DeviceId pick = candidates[rng.below(candidates.size())];
        bool served = false;
        for (std::size_t i = 0; i < queue.size(); ++i) {
          if (!taken[i] && queue[i].device == pick) {
            taken[i] = true;
            out.served.push_back(queue[i]);
            served = true;
            break;
          }
        }
        if (!served) ++out.wasted_grants;
      }
      for (std::size_t i = 0; i < queue.size(); ++i) {
        if (!taken[i]) out.deferred.push_back(queue[i]);
      }
      return out;
    }
  }

  const std::size_t n = std::min(capacity, queue.size());
  out.served.assign(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(n));
  out.deferred.assign(queue.begin() + static_cast<std::ptrdiff_t>(n), queue.end());
  return out;
}

std::int64_t SlotAllocation::total() const {
  return std::accumulate(granted.begin(), granted.end(), std::int64_t{0});
}

SlotAllocation bulk_schedule_microframe(std::span<const BulkDemand> demand,
                                        const usb::BulkLimits& limits,
                                        const usb::ArbitrationPolicy& policy,
                                        std::size_t rr_start, Rng& rng) {
  const std::size_t n = demand.size();
  SlotAllocation out;
  out.granted.assign(n, 0);
  out.next_start = n ? rr_start % n : 0;
  if (n == 0) return out;

  std::vector<std::int64_t> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = std::max<std::int64_t>(demand[i].pending, 0);
  std::int64_t slots = limits.transfers_per_microframe;

  auto grant_block = [&](std::size_t i, std::int64_t k) {
    for (std::int64_t s = 0; s < k; ++s) out.slot_owner.push_back(i);
    out.granted[i] += k;
    remaining[i] -= k;
    slots -= k;
  };

  switch (policy.kind) {
    case usb::ArbitrationKind::fair_round_robin: {
      std::size_t p = rr_start % n;
      while (slots > 0) {
        std::size_t probe = 0;
        while (probe < n && remaining[(p + probe) % n] == 0) ++probe;
        if (probe == n) break;
        const std::size_t i = (p + probe) % n;
        grant_block(i, 1);
        p = (i + 1) % n;
      }
      out.next_start = p;
      break;
    }
    case usb::ArbitrationKind::unfair_priority: {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return policy.priority_rank(demand[a].device) < policy.priority_rank(demand[b].device);
      });
      for (std::size_t i : order) grant_block(i, std::min(remaining[i], slots));
      break;
    }
    case usb::ArbitrationKind::randomized_allocation: {
      // Each slot goes to a uniformly drawn connected device whether or not
      // it has work; a slot drawn by an idle device stays empty.
      const std::int64_t budget = slots;
      for (std::int64_t s = 0; s < budget; ++s) {
        const std::size_t i = rng.below(n);
        if (remaining[i] > 0) grant_block(i, 1);
      }
      break;
    }
  }
  return out;
}

}  // namespace hublab::sim
