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

#include "hublab/experiment/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hublab/common/error.hpp"
#include "hublab/usb/bulk_limits.hpp"

namespace hublab::experiment {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string with_commas(std::int64_t v) {
  std::string s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

std::string decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

struct Run {
  fs::path dir;
  json summary;
  json metadata;
  std::string error;

  std::string provenance() const {
    return dir.generic_string() + " digest=" + metadata.value("config_digest", std::string("?")) +
           " seed=" + std::to_string(metadata.value("master_seed", std::uint64_t{0}));
  }
  std::string scenario() const { return summary.value("scenario", std::string()); }
};

Run load_run(const fs::path& dir) {
  Run r;
  r.dir = dir;
  for (const auto& [file, target] : {std::pair{dir / "reports" / "summary.json", &r.summary},
                                     std::pair{dir / "metadata.json", &r.metadata}}) {
    std::ifstream in(file);
    if (!in) {
      r.error = "missing " + fs::relative(file, dir).generic_string();
      return r;
    }
    try {
      *target = json::parse(in);
    } catch (const json::exception& e) {
      r.error = "unreadable " + fs::relative(file, dir).generic_string();
      return r;
    }
  }
  return r;
}

// Fills the fixed rows in order, appends rows that match none of them.
void place(ReportTable& t, std::vector<ReportRow> found) {
  std::vector<ReportRow> out;
  for (const auto& row : t.rows) {
    bool any = false;
    for (const auto& f : found) {
      if (f.name == row.name) {
        out.push_back(f);
        any = true;
      }
    }
    if (!any) out.push_back(row);
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  for (const auto& f : found) {
    if (std::none_of(t.rows.begin(), t.rows.end(), [&](const auto& r) { return r.name == f.name; })) {
      out.push_back(f);
    }
  }
  t.rows = std::move(out);
}

std::string hub_row_name(const std::string& speed, bool vpn) {
  std::string name = speed == "usb3x" ? "USB 3.X Hub" : speed == "usbc" ? "USB-C Hub" : "USB 2.0 Hub";
  if (vpn) name += " on VPN Network";
  return name;
}

}  // namespace

ReportTable bulk_limits_table() {
  ReportTable t;
  t.id = "bulk_limits";
  t.title = "USB 2.0 bulk transaction limits";
  t.row_header = "Data Payload (bytes)";
  t.columns = {"Max Bandwidth (bytes/sec)", "Maximum Transfers per Microframe", "Bytes per Microframe"};
  for (std::int64_t p : {1, 8, 32, 128, 512}) {
    const auto l = usb::bulk_limits(usb::PayloadSize(p));
    t.rows.push_back({std::to_string(p),
                      {with_commas(l.bytes_per_second), std::to_string(l.transfers_per_microframe),
                       std::to_string(l.bytes_per_microframe)},
                      "computed"});
  }
  return t;
}

std::vector<ReportTable> build_tables(const std::vector<fs::path>& run_dirs) {
  std::vector<fs::path> dirs = run_dirs;
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
  std::vector<Run> runs;
  for (const auto& d : dirs) runs.push_back(load_run(d));

  std::vector<ReportTable> tables;
  tables.push_back(bulk_limits_table());

  ReportTable keys;
  keys.id = "password_recovery";
  keys.title = "Password recovery (simulated typist)";
  keys.banner = kSimulatedBanner;
  keys.row_header = "dataset";
  keys.columns = {"Top-10", "Top-50"};
  for (const char* n : {"7658 Words, 26 Letters", "1000 Words, 10 Letters", "4500 Words, 15 Letters"}) {
    keys.rows.push_back({n, {}, ""});
  }

  ReportTable sites;
  sites.id = "website_classifier";
  sites.title = "Website classifier, 5-fold cross-validation";
  sites.banner = kSimulatedBanner;
  sites.row_header = "model";
  sites.columns = {"Top-1", "Top-3", "mean site r"};
  for (const auto& [speed, vpn] : {std::pair{"usb2", false}, std::pair{"usb3x", false}, std::pair{"usbc", false},
                                   std::pair{"usb2", true}}) {
    sites.rows.push_back({hub_row_name(speed, vpn), {}, ""});
  }

  ReportTable mitigation;
  mitigation.id = "mitigation";
  mitigation.title = "Arbitration policy comparison";
  mitigation.banner = kSimulatedBanner;
  mitigation.row_header = "policy";
  mitigation.columns = {"keystroke F1", "mean site r"};
  for (const char* p : {"fair_round_robin", "randomized_allocation"}) mitigation.rows.push_back({p, {}, ""});

  ReportTable sweep;
  sweep.id = "resolution_sweep";
  sweep.title = "Burst detection by transfer size";
  sweep.banner = kSimulatedBanner;
  sweep.row_header = "burst size";
  sweep.columns = {"detected / repeats"};

  ReportTable listing;
  listing.id = "runs";
  listing.title = "Run directories";
  listing.row_header = "run";
  listing.columns = {"scenario", "config digest", "master seed"};

  std::vector<ReportRow> key_rows, site_rows, mitigation_rows;
  for (const auto& r : runs) {
    if (!r.error.empty()) {
      listing.rows.push_back({r.dir.generic_string(), {}, r.error});
      continue;
    }
    listing.rows.push_back({r.dir.generic_string(),
                            {r.scenario(), r.metadata.value("config_digest", std::string("?")),
                             std::to_string(r.metadata.value("master_seed", std::uint64_t{0}))},
                            r.provenance()});
    const auto& s = r.summary;
    const std::string scen = r.scenario();
    if (scen == "keystroke") {
      std::map<std::size_t, double> acc;
      for (const auto& t : s.at("topk")) acc[t.at("k").get<std::size_t>()] = t.at("accuracy").get<double>();
      auto cell = [&](std::size_t k) { return acc.count(k) ? percent(acc[k]) : std::string("n/a"); };
      key_rows.push_back({s.at("dataset").get<std::string>(), {cell(10), cell(50)}, r.provenance()});
    } else if (scen == "website") {
      std::vector<std::string> cells{"n/a", "n/a", decimal(s.at("mean_r").get<double>())};
      if (s.contains("cv")) {
        cells[0] = percent(s.at("cv").at("top1").get<double>());
        cells[1] = percent(s.at("cv").at("top3").get<double>());
      }
      site_rows.push_back({hub_row_name(s.value("hub_speed_class", std::string("usb2")), s.value("vpn", false)),
                           cells, r.provenance()});
    } else if (scen == "mitigation") {
      for (const auto& p : s.at("policies")) {
        mitigation_rows.push_back({p.at("policy").get<std::string>(),
                                   {decimal(p.at("detection").at("f1").get<double>()),
                                    decimal(p.at("mean_r").get<double>())},
                                   r.provenance()});
      }
    } else if (scen == "resolution") {
      for (const auto& d : s.at("detections")) {
        sweep.rows.push_back({std::to_string(d.at("size_bytes").get<std::int64_t>()) + " B",
                              {std::to_string(d.at("detected").get<std::int64_t>()) + " / " +
                               std::to_string(d.at("repeats").get<std::int64_t>())},
                              r.provenance()});
      }
    }
  }
  place(keys, key_rows);
  place(sites, site_rows);
  place(mitigation, mitigation_rows);
  if (sweep.rows.empty()) sweep.rows.push_back({"(no resolution run)", {}, ""});

  tables.push_back(keys);
  tables.push_back(sites);
  tables.push_back(mitigation);
  tables.push_back(sweep);
  tables.push_back(listing);
  return tables;
}

std::string format_table(const ReportTable& t) {
  std::vector<std::string> header{t.row_header};
  header.insert(header.end(), t.columns.begin(), t.columns.end());
  header.push_back("provenance");
  std::vector<std::vector<std::string>> grid{header};
  for (const auto& r : t.rows) {
    std::vector<std::string> line{r.name};
    if (r.absent()) {
      line.push_back("(absent)");
      line.resize(header.size() - 1, "");
    } else {
      line.insert(line.end(), r.cells.begin(), r.cells.end());
      line.resize(header.size() - 1, "");
    }
    line.push_back(r.provenance);
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  os << t.title << '\n';
  if (!t.banner.empty()) os << "[" << t.banner << "]\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < grid[i].size(); ++c) {
      std::string cell = grid[i][c];
      if (c + 1 < grid[i].size()) cell.resize(width[c], ' ');
      line += cell;
      if (c + 1 < grid[i].size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

void to_json(nlohmann::json& j, const ReportTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"name", r.name}, {"absent", r.absent()}, {"cells", r.cells}, {"provenance", r.provenance}});
  }
  j = {{"id", t.id},         {"title", t.title}, {"banner", t.banner},
       {"row_header", t.row_header}, {"columns", t.columns}, {"rows", rows}};
}

std::vector<ReportTable> reproduce_tables(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  const auto tables = build_tables(run_dirs);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  json all = json::array();
  for (const auto& t : tables) {
    std::ofstream out(out_dir / (t.id + ".txt"), std::ios::binary);
    if (!out) throw IoError("cannot write into " + out_dir.string());
    out << format_table(t);
    all.push_back(t);
  }
  std::ofstream out(out_dir / "tables.json", std::ios::binary);
  if (!out) throw IoError("cannot write into " + out_dir.string());
  out << all.dump(2) << '\n';
  return tables;
}

}  // namespace hublab::experiment
