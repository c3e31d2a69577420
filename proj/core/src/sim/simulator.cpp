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

#include "hublab/sim/simulator.hpp"

#include <algorithm>
#include <deque>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"

namespace hublab::sim {
namespace {

struct ActiveRequest {
  std::int64_t txns_left = 0;
  std::int64_t bytes_left = 0;
};

struct BulkState {
  const BulkDevice* dev = nullptr;
  std::size_t next_request = 0;
  std::deque<ActiveRequest> active;
  std::vector<ActiveRequest> issued;  // eligible from the next microframe
  std::int64_t pending = 0;
};

void run_bulk(const usb::HubConfig& hub, const Workload& w, std::int64_t duration_us, Rng& policy_rng,
              std::vector<std::int64_t>& spy_completions, SimStats& stats) {
  const usb::BulkLimits limits = usb::bulk_limits(hub.bulk_payload);
  const std::int64_t cap = limits.transfers_per_microframe;
  const std::int64_t payload = hub.bulk_payload.bytes();

  std::vector<BulkState> states(w.bulk_devices.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    states[i].dev = &w.bulk_devices[i];
    if (const auto& cl = w.bulk_devices[i].closed_loop) {
      const std::int64_t txns = usb::transactions_for(cl->read_bytes, hub.bulk_payload);
      for (std::int64_t q = 0; q < cl->queue_depth; ++q) {
        states[i].active.push_back({txns, cl->read_bytes});
        states[i].pending += txns;
      }
    }
  }

  std::vector<BulkDemand> demand(states.size());
  std::size_t rr = 0;
  const std::int64_t microframes = duration_us / hub.microframe_us;
  stats.microframes = microframes;

  for (std::int64_t m = 0; m < microframes; ++m) {
    const std::int64_t t0 = m * hub.microframe_us;
    std::int64_t total_pending = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      auto& st = states[i];
      const auto& reqs = st.dev->requests;
      while (st.next_request < reqs.size() && reqs[st.next_request].t_us <= t0) {
        const auto& r = reqs[st.next_request++];
        const std::int64_t txns = usb::transactions_for(r.bytes, hub.bulk_payload);
        if (txns == 0) continue;
        st.active.push_back({txns, r.bytes});
        st.pending += txns;
      }
      for (const auto& r : st.issued) {
        st.active.push_back(r);
        st.pending += r.txns_left;
      }
      st.issued.clear();
      demand[i] = {st.dev->id, st.pending};
      total_pending += st.pending;
    }
    if (total_pending == 0) continue;

    const SlotAllocation alloc =
        bulk_schedule_microframe(demand, limits, hub.arbitration, rr, policy_rng);
    rr = alloc.next_start;
    const std::int64_t used = static_cast<std::int64_t>(alloc.slot_owner.size());
    stats.max_slots_in_microframe = std::max(stats.max_slots_in_microframe, used);
    if (used < cap) stats.idle_slots_with_pending += std::min(cap - used, total_pending - used);

    for (std::size_t j = 0; j < alloc.slot_owner.size(); ++j) {
      auto& st = states[alloc.slot_owner[j]];
      // The host controller reports completions at the microframe boundary.
      const std::int64_t t = t0 + hub.microframe_us;
      ActiveRequest& req = st.active.front();
      const std::int64_t moved = std::min(payload, req.bytes_left);
      req.bytes_left -= moved;
      req.txns_left -= 1;
      st.pending -= 1;
      stats.bulk_bytes_delivered[st.dev->id] += moved;
      stats.transactions_served[st.dev->id] += 1;
      if (req.txns_left == 0) {
        st.active.pop_front();
        if (st.dev->id == w.spy_device_id) spy_completions.push_back(t);
        if (const auto& cl = st.dev->closed_loop) {
          st.issued.push_back({usb::transactions_for(cl->read_bytes, hub.bulk_payload), cl->read_bytes});
        }
      }
    }
  }
}

void run_interrupt(const usb::HubConfig& hub, const Workload& w, std::int64_t duration_us,
                   Rng& policy_rng, std::vector<std::int64_t>& spy_completions, SimStats& stats) {
  const auto tt_count = static_cast<std::size_t>(hub.tt_count);
  const auto& devices = w.interrupt_devices;

  std::vector<std::vector<InterruptTransaction>> pending(tt_count);
  std::vector<std::vector<DeviceId>> connected(tt_count);
  std::vector<std::size_t> tt_of(devices.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    tt_of[i] = static_cast<std::size_t>(devices[i].port) % tt_count;
    connected[tt_of[i]].push_back(devices[i].id);
  }
  std::vector<bool> outstanding(devices.size(), false);
  std::vector<std::size_t> next_event(devices.size(), 0);
  std::uint64_t seq = 0;

  const std::int64_t frames = duration_us / hub.frame_us;
  stats.frames = frames;
  const std::int64_t slot_spacing = hub.frame_us / hub.tt_frame_capacity;

  for (std::int64_t k = 0; k < frames; ++k) {
    const std::int64_t t0 = k * hub.frame_us;
    for (std::size_t i = 0; i < devices.size(); ++i) {
      const auto& d = devices[i];
      if (d.continuous && t0 % d.poll_interval_us == 0 && !outstanding[i]) {
        pending[tt_of[i]].push_back({d.id, d.role, k, seq++});
        outstanding[i] = true;
      }
      while (next_event[i] < d.event_times_us.size() && d.event_times_us[next_event[i]] <= t0) {
        pending[tt_of[i]].push_back({d.id, d.role, k, seq++});
        ++next_event[i];
      }
    }
    for (std::size_t tt = 0; tt < tt_count; ++tt) {
      if (pending[tt].empty() &&
          hub.arbitration.kind != usb::ArbitrationKind::randomized_allocation) {
        continue;
      }
      TtFrameContext ctx{hub.tt_frame_capacity, connected[tt]};
      FrameSchedule sched = tt_schedule_frame(pending[tt], hub.arbitration, ctx, policy_rng);
      stats.wasted_tt_grants += sched.wasted_grants;
      for (std::size_t j = 0; j < sched.served.size(); ++j) {
        const auto& s = sched.served[j];
        const std::int64_t t = t0 + static_cast<std::int64_t>(j) * slot_spacing;
        for (std::size_t i = 0; i < devices.size(); ++i) {
          if (devices[i].id == s.device && devices[i].continuous) outstanding[i] = false;
        }
        stats.transactions_served[s.device] += 1;
        if (s.device == w.spy_device_id) spy_completions.push_back(t);
      }
      pending[tt] = std::move(sched.deferred);
    }
  }
}

}  // namespace

SimulationResult simulate(const usb::HubConfig& hub, const Workload& workload,
                          std::int64_t duration_us, std::uint64_t seed) {
  hub.validate();
  if (duration_us < hub.frame_us) throw DomainError("duration must cover at least one frame");
  workload.validate(duration_us);

  SimulationResult result;
  const std::uint64_t noise_seed = derive_seed(seed, streams::kNoise, 0);
  Rng policy_rng(derive_seed(seed, streams::kPolicy, hub.arbitration.stream_salt));
  Rng noise_rng(noise_seed);

  std::vector<std::int64_t> completions;
  if (!workload.bulk_devices.empty()) {
    run_bulk(hub, workload, duration_us, policy_rng, completions, result.stats);
  }
  if (!workload.interrupt_devices.empty()) {
    std::vector<std::int64_t> interrupt_completions;
    run_interrupt(hub, workload, duration_us, policy_rng, interrupt_completions, result.stats);
    if (completions.empty()) {
      completions = std::move(interrupt_completions);
    }
  }

  SpyTrace& spy = result.bundle.spy;
  spy.records.reserve(completions.size());
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < completions.size(); ++i) {
    const std::int64_t jitter =
        workload.noise.jitter_us > 0 ? noise_rng.between(0, workload.noise.jitter_us) : 0;
    std::int64_t t = completions[i] + jitter;
    if (i > 0) {
      t = std::max(t, prev + 1);
      spy.records.push_back({t, t - prev});
    }
    prev = t;
  }
  spy.meta.scenario = workload.scenario;
  spy.meta.label = workload.label;
  spy.meta.seed = seed;
  spy.meta.hub_digest = hub.digest();
  spy.meta.noise_jitter_us = workload.noise.jitter_us;
  spy.meta.duration_us = duration_us;

  result.bundle.key_truth = workload.key_truth;
  result.bundle.traffic_truth = workload.traffic_truth;
  result.bundle.noise_seed = noise_seed;
  return result;
}

TraceBundle run_simulation(const usb::HubConfig& hub, const Workload& workload,
                           std::int64_t duration_us, std::uint64_t seed) {
  return simulate(hub, workload, duration_us, seed).bundle;
}

}  // namespace hublab::sim
