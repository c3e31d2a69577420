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

#include <filesystem>
#include <iosfwd>

#include "hublab/sim/trace.hpp"

namespace hublab::sim {

// Trace file: "# key=value" header lines, then one "t_us,delay_us" record
// per line. Keys: format, scenario, label, seed, hub, noise_jitter_us,
// duration_us. Unknown keys are ignored on read.
void write_trace(std::ostream& out, const SpyTrace& trace);
SpyTrace read_trace(std::istream& in);

// Key sidecar: optional "# word=..." header, then "t_us,press|release,char".
void write_key_events(std::ostream& out, const KeyEventTrace& keys);
KeyEventTrace read_key_events(std::istream& in);

// Traffic sidecar: "t_us,bytes" per line.
void write_traffic(std::ostream& out, const TrafficTimeline& traffic);
TrafficTimeline read_traffic(std::istream& in);

// File helpers; throw IoError on open failure.
void save_trace(const std::filesystem::path& path, const SpyTrace& trace);
SpyTrace load_trace(const std::filesystem::path& path);
void save_key_events(const std::filesystem::path& path, const KeyEventTrace& keys);
KeyEventTrace load_key_events(const std::filesystem::path& path);
void save_traffic(const std::filesystem::path& path, const TrafficTimeline& traffic);
TrafficTimeline load_traffic(const std::filesystem::path& path);

/// Writes <stem>.trace plus the populated truth sidecar (<stem>.keys or
/// <stem>.traffic) next to it.
void save_bundle(const std::filesystem::path& stem, const TraceBundle& bundle);
TraceBundle load_bundle(const std::filesystem::path& stem);

}  // namespace hublab::sim
