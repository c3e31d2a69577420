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

#include "hublab/sim/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "hublab/common/error.hpp"

namespace hublab::sim {
namespace {

constexpr std::string_view kFormat = "hublab-trace/1";

std::int64_t parse_int(std::string_view s, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw IoError("line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view s, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw IoError("line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

// Splits "# key=value"; returns false for non-header lines.
bool header_kv(std::string_view line, std::string_view& key, std::string_view& value) {
  if (line.empty() || line.front() != '#') return false;
  line.remove_prefix(1);
  line = trim(line);
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return false;
  key = trim(line.substr(0, eq));
  value = trim(line.substr(eq + 1));
  return true;
}

template <class T>
void save_with(const std::filesystem::path& path, const T& value,
               void (*writer)(std::ostream&, const T&)) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  writer(out, value);
  if (!out) throw IoError("write failed: " + path.string());
}

template <class T>
T load_with(const std::filesystem::path& path, T (*reader)(std::istream&)) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return reader(in);
}

}  // namespace

void write_trace(std::ostream& out, const SpyTrace& trace) {
  out << "# format=" << kFormat << '\n';
  out << "# scenario=" << trace.meta.scenario << '\n';
  if (!trace.meta.label.empty()) out << "# label=" << trace.meta.label << '\n';
  out << "# seed=" << trace.meta.seed << '\n';
  out << "# hub=" << trace.meta.hub_digest << '\n';
  out << "# noise_jitter_us=" << trace.meta.noise_jitter_us << '\n';
  out << "# duration_us=" << trace.meta.duration_us << '\n';
  for (const auto& r : trace.records) out << r.t_us << ',' << r.delay_us << '\n';
}

SpyTrace read_trace(std::istream& in) {
  SpyTrace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::string_view key, value;
    if (header_kv(sv, key, value)) {
      if (key == "scenario") trace.meta.scenario = value;
      else if (key == "label") trace.meta.label = value;
      else if (key == "seed") trace.meta.seed = parse_uint(value, line_no);
      else if (key == "hub") trace.meta.hub_digest = value;
      else if (key == "noise_jitter_us") trace.meta.noise_jitter_us = parse_int(value, line_no);
      else if (key == "duration_us") trace.meta.duration_us = parse_int(value, line_no);
      continue;
    }
    if (sv.front() == '#') continue;
    const auto comma = sv.find(',');
    if (comma == std::string_view::npos) {
      throw IoError("line " + std::to_string(line_no) + ": expected t_us,delay_us");
    }
    trace.records.push_back({parse_int(sv.substr(0, comma), line_no),
                             parse_int(sv.substr(comma + 1), line_no)});
  }
  return trace;
}

void write_key_events(std::ostream& out, const KeyEventTrace& keys) {
  if (!keys.word.empty()) out << "# word=" << keys.word << '\n';
  for (const auto& e : keys.events) {
    out << e.t_us << ',' << (e.kind == KeyAction::press ? "press" : "release") << ',' << e.ch
        << '\n';
  }
}

KeyEventTrace read_key_events(std::istream& in) {
  KeyEventTrace keys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::string_view key, value;
    if (header_kv(sv, key, value)) {
      if (key == "word") keys.word = value;
      continue;
    }
    if (sv.front() == '#') continue;
    const auto c1 = sv.find(',');
    const auto c2 = sv.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos || c2 + 2 != sv.size()) {
      throw IoError("line " + std::to_string(line_no) + ": expected t_us,press|release,char");
    }
    KeyEvent e;
    e.t_us = parse_int(sv.substr(0, c1), line_no);
    const auto kind = sv.substr(c1 + 1, c2 - c1 - 1);
    if (kind == "press") e.kind = KeyAction::press;
    else if (kind == "release") e.kind = KeyAction::release;
    else throw IoError("line " + std::to_string(line_no) + ": bad key action");
    e.ch = sv[c2 + 1];
    keys.events.push_back(e);
  }
  return keys;
}

void write_traffic(std::ostream& out, const TrafficTimeline& traffic) {
  for (const auto& p : traffic.points) out << p.t_us << ',' << p.bytes << '\n';
}

TrafficTimeline read_traffic(std::istream& in) {
  TrafficTimeline t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const auto comma = sv.find(',');
    if (comma == std::string_view::npos) {
      throw IoError("line " + std::to_string(line_no) + ": expected t_us,bytes");
    }
    t.points.push_back({parse_int(sv.substr(0, comma), line_no),
                        parse_int(sv.substr(comma + 1), line_no)});
  }
  return t;
}

void save_trace(const std::filesystem::path& path, const SpyTrace& trace) {
  save_with<SpyTrace>(path, trace, &write_trace);
}
SpyTrace load_trace(const std::filesystem::path& path) { return load_with<SpyTrace>(path, &read_trace); }

void save_key_events(const std::filesystem::path& path, const KeyEventTrace& keys) {
  save_with<KeyEventTrace>(path, keys, &write_key_events);
}
KeyEventTrace load_key_events(const std::filesystem::path& path) {
  return load_with<KeyEventTrace>(path, &read_key_events);
}

void save_traffic(const std::filesystem::path& path, const TrafficTimeline& traffic) {
  save_with<TrafficTimeline>(path, traffic, &write_traffic);
}
TrafficTimeline load_traffic(const std::filesystem::path& path) {
  return load_with<TrafficTimeline>(path, &read_traffic);
}

void save_bundle(const std::filesystem::path& stem, const TraceBundle& bundle) {
  auto with_ext = [&](const char* ext) {
    auto p = stem;
    p += ext;
    return p;
  };
  save_trace(with_ext(".trace"), bundle.spy);
  if (bundle.key_truth) save_key_events(with_ext(".keys"), *bundle.key_truth);
  if (bundle.traffic_truth) save_traffic(with_ext(".traffic"), *bundle.traffic_truth);
}

TraceBundle load_bundle(const std::filesystem::path& stem) {
  auto with_ext = [&](const char* ext) {
    auto p = stem;
    p += ext;
    return p;
  };
  TraceBundle b;
  b.spy = load_trace(with_ext(".trace"));
  if (std::filesystem::exists(with_ext(".keys"))) b.key_truth = load_key_events(with_ext(".keys"));
  if (std::filesystem::exists(with_ext(".traffic"))) b.traffic_truth = load_traffic(with_ext(".traffic"));
  return b;
}

}  // namespace hublab::sim
