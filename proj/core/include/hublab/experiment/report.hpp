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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hublab::experiment {

inline constexpr const char* kSimulatedBanner = "simulated, not comparable to hardware measurements";

struct ReportRow {
  std::string name;
  std::vector<std::string> cells;  // empty when the row is absent
  /// Run directory, config digest and master seed behind the numbers.
  std::string provenance;
  bool absent() const { return cells.empty(); }
};

struct ReportTable {
  std::string id;  // file stem
  std::string title;
  std::string banner;  // empty for exact tables
  std::string row_header;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;
};

/// Bulk transaction limits for payloads 1, 8, 32, 128 and 512 bytes.
ReportTable bulk_limits_table();

/// The bulk limits table plus the keystroke, website and mitigation tables assembled from
/// the summaries of the given run directories. Directories are processed in
/// sorted order; runs that are missing or incomplete are reported as absent
/// rows, never filled in.
std::vector<ReportTable> build_tables(const std::vector<std::filesystem::path>& run_dirs);

std::string format_table(const ReportTable& t);
void to_json(nlohmann::json& j, const ReportTable& t);

/// Writes <id>.txt for every table and tables.json into out_dir.
std::vector<ReportTable> reproduce_tables(const std::vector<std::filesystem::path>& run_dirs,
                                          const std::filesystem::path& out_dir);

}  // namespace hublab::experiment
