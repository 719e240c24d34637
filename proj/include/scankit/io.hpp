// Copyright 2026 The scankit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ==============================================================================

// Scanpath files and report serialization.
//
// Scanpaths travel as JSON lines, one gaze sample per row:
//   {"image_id":"p01","user_id":"u3","t":0.5,"lat":0.12,"lon":-2.9}
// with t in seconds and angles in radians (degrees behind a flag).

#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scankit/format.hpp"
#include "scankit/metrics.hpp"
#include "scankit/sphere.hpp"

namespace scankit {

struct ScanpathRecord {
  std::string image_id;
  std::string user_id;
  double t = 0.0;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const ScanpathRecord&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline double angle_field(const nlohmann::json& row, const char* key, bool degrees, std::size_t line) {
  if (!row.contains(key) || !row.at(key).is_number()) throw ParseError(line, std::string("missing numeric field '") + key + "'");
  const double v = row.at(key).get<double>();
  if (!std::isfinite(v)) throw ParseError(line, std::string("non-finite '") + key + "'");
  return degrees ? deg_to_rad(v) : v;
}

inline std::string id_field(const nlohmann::json& row, const char* key, std::size_t line) {
  if (!row.contains(key)) throw ParseError(line, std::string("missing field '") + key + "'");
  const auto& v = row.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError(line, std::string("field '") + key + "' must be a string");
}

}  // namespace detail

/// Parses every row; blank lines are skipped. Angles are range-checked
/// (lat within +-pi/2, lon within +-pi).
inline std::vector<ScanpathRecord> read_records(std::istream& in, bool degrees = false) {
  std::vector<ScanpathRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!row.is_object()) throw ParseError(line, "row must be a JSON object");
    ScanpathRecord r;
    r.image_id = detail::id_field(row, "image_id", line);
    r.user_id = detail::id_field(row, "user_id", line);
    if (!row.contains("t") || !row.at("t").is_number()) throw ParseError(line, "missing numeric field 't'");
    r.t = row.at("t").get<double>();
    if (!std::isfinite(r.t)) throw ParseError(line, "non-finite 't'");
    r.lat = detail::angle_field(row, "lat", degrees, line);
    r.lon = detail::angle_field(row, "lon", degrees, line);
    if (std::abs(r.lat) > kHalfPi) throw ParseError(line, "lat outside [-pi/2, pi/2]");
    if (std::abs(r.lon) > kPi) throw ParseError(line, "lon outside [-pi, pi]");
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_record(std::ostream& os, const ScanpathRecord& r) {
  os << "{\"image_id\":" << nlohmann::json(r.image_id).dump() << ",\"user_id\":" << nlohmann::json(r.user_id).dump()
     << ",\"t\":" << format_double(r.t) << ",\"lat\":" << format_double(r.lat) << ",\"lon\":" << format_double(r.lon)
     << "}\n";
}

inline void write_records(std::ostream& os, const std::vector<ScanpathRecord>& rows) {
  for (const auto& r : rows) write_record(os, r);
}

enum class ShortRecordPolicy { kReject, kTruncate };

struct IngestConfig {
  double target_hz = 1.0;
  std::size_t target_length = kCanonicalScanpathLength;
  ShortRecordPolicy short_policy = ShortRecordPolicy::kReject;
  bool degrees = false;
};

/// One image's scanpaths plus, per scanpath, the source rows it kept.
struct IngestedImage {
  ScanpathSet set;
  std::vector<std::vector<ScanpathRecord>> records;
};

struct IngestResult {
  std::map<std::string, IngestedImage> images;
  std::vector<std::string> warnings;

  /// Flat view, keyed by image id.
  std::map<std::string, ScanpathSet> sets() const {
    std::map<std::string, ScanpathSet> out;
    for (const auto& [id, img] : images) out[id] = img.set;
    return out;
  }
};

/// Slot k of the target lattice sits at (k + 0.5) / hz and takes the row
/// nearest in time (ties go to the earlier row), however far away, so gaps
/// inside a record repeat their neighbours. Slots more than half a period
/// outside [first t, last t] are uncovered; the first uncovered slot ends the
/// record.
inline std::vector<ScanpathRecord> decimate(const std::vector<ScanpathRecord>& rows, const IngestConfig& cfg) {
  std::vector<ScanpathRecord> out;
  if (rows.empty()) return out;
  const double half = 0.5 / cfg.target_hz;
  std::size_t j = 0;
  for (std::size_t k = 0; k < cfg.target_length; ++k) {
    const double target = (static_cast<double>(k) + 0.5) / cfg.target_hz;
    if (target < rows.front().t - half || target > rows.back().t + half) break;
    while (j + 1 < rows.size() && std::abs(rows[j + 1].t - target) < std::abs(rows[j].t - target)) ++j;
    out.push_back(rows[j]);
  }
  return out;
}

/// Groups rows by (image_id, user_id), validates strictly increasing t and
/// decimates onto the target lattice. Users keep first-seen order.
inline IngestResult ingest_records(const std::vector<ScanpathRecord>& rows, const IngestConfig& cfg = {},
                                   const std::vector<std::size_t>& line_numbers = {}) {
  if (!(cfg.target_hz > 0)) throw std::invalid_argument("ingest: target_hz must be positive");
  if (cfg.target_length == 0) throw std::invalid_argument("ingest: target length must be positive");
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<ScanpathRecord>> groups;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto key = std::make_pair(rows[k].image_id, rows[k].user_id);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    if (!it->second.empty() && !(rows[k].t > it->second.back().t))
      throw ParseError(k < line_numbers.size() ? line_numbers[k] : k + 1,
                       "non-monotone t for image '" + key.first + "' user '" + key.second + "'");
    it->second.push_back(rows[k]);
  }
  IngestResult result;
  for (const auto& key : order) {
    std::vector<ScanpathRecord> kept = decimate(groups[key], cfg);
    if (kept.size() < cfg.target_length) {
      const std::string what = "image '" + key.first + "' user '" + key.second + "': " + std::to_string(kept.size()) +
                               " of " + std::to_string(cfg.target_length) + " samples";
      if (cfg.short_policy == ShortRecordPolicy::kReject || kept.empty()) {
        result.warnings.push_back("rejected short record " + what);
        continue;
      }
      result.warnings.push_back("truncated short record " + what);
    }
    IngestedImage& img = result.images[key.first];
    img.set.image_id = key.first;
    Scanpath sp;
    sp.sample_rate_hz = cfg.target_hz;
    for (const auto& r : kept) sp.points.push_back(latlon_to_unit({r.lat, r.lon}));
    img.set.scanpaths.push_back(std::move(sp));
    img.set.user_ids.push_back(key.second);
    img.records.push_back(std::move(kept));
  }
  return result;
}

inline IngestResult ingest(std::istream& in, const IngestConfig& cfg = {}) {
  // Line numbers are tracked so grouping errors can point at the row.
  std::vector<ScanpathRecord> rows;
  std::vector<std::size_t> lines;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream one(text);
    std::vector<ScanpathRecord> parsed;
    try {
      parsed = read_records(one, cfg.degrees);
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      throw ParseError(line, msg.substr(msg.find(": ") + 2));
    }
    for (auto& r : parsed) {
      rows.push_back(std::move(r));
      lines.push_back(line);
    }
  }
  return ingest_records(rows, cfg, lines);
}

inline IngestResult ingest_file(const std::string& path, const IngestConfig& cfg = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return ingest(in, cfg);
}

/// Writes the rows an ingest kept, in image then user order.
inline void write_ingested(std::ostream& os, const IngestResult& r) {
  for (const auto& [id, img] : r.images)
    for (const auto& rows : img.records) write_records(os, rows);
}

/// Scanpaths as rows on the (k + 0.5) / hz lattice. Users without an id are
/// named by index.
inline void write_scanpaths(std::ostream& os, const ScanpathSet& set, bool degrees = false) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Scanpath& sp = set.scanpaths[i];
    const std::string user = i < set.user_ids.size() ? set.user_ids[i] : std::to_string(i);
    for (std::size_t k = 0; k < sp.size(); ++k) {
      const GazePoint g = unit_to_latlon(sp[k]);
      write_record(os, {set.image_id, user, (static_cast<double>(k) + 0.5) / sp.sample_rate_hz,
                        degrees ? rad_to_deg(g.lat) : g.lat, degrees ? rad_to_deg(g.lon) : g.lon});
    }
  }
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::ordered_json to_json(const MetricConfig& c) {
  return {{"grid", {{"n_lat", c.grid.n_lat}, {"n_lon", c.grid.n_lon}}},
          {"scanmatch", {{"max_score", c.scanmatch.max_score}, {"gap_penalty", c.scanmatch.gap_penalty}}},
          {"recurrence", {{"radius", c.recurrence.radius}, {"min_line", c.recurrence.min_line}}},
          {"tde", {{"window", c.tde_window}, {"stride", c.tde_stride}}}};
}

inline nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json metrics;
  for (const auto& name : metric_names()) metrics[name] = r.mean.get(name);
  nlohmann::ordered_json j{{"image_id", r.image_id}, {"protocol", protocol_name(r.protocol)}, {"pairs", r.pairs},
                           {"metrics", metrics}, {"config", to_json(r.config)}};
  if (r.protocol == Protocol::kRandom) j["seed"] = r.seed;
  return j;
}

/// One JSON document per line, one line per report.
inline void write_reports_json(std::ostream& os, const std::vector<MetricReport>& reports) {
  for (const auto& r : reports) os << to_json(r).dump() << "\n";
}

/// Flat key=value lines; reports are separated by a blank line.
inline void write_report_text(std::ostream& os, const MetricReport& r) {
  os << "image_id=" << r.image_id << "\n"
     << "protocol=" << protocol_name(r.protocol) << "\n"
     << "pairs=" << r.pairs << "\n";
  for (const auto& name : metric_names()) os << name << "=" << format_double(r.mean.get(name)) << "\n";
  os << "config.grid.n_lat=" << r.config.grid.n_lat << "\n"
     << "config.grid.n_lon=" << r.config.grid.n_lon << "\n"
     << "config.scanmatch.max_score=" << format_double(r.config.scanmatch.max_score) << "\n"
     << "config.scanmatch.gap_penalty=" << format_double(r.config.scanmatch.gap_penalty) << "\n"
     << "config.recurrence.radius=" << format_double(r.config.recurrence.radius) << "\n"
     << "config.recurrence.min_line=" << r.config.recurrence.min_line << "\n"
     << "config.tde.window=" << r.config.tde_window << "\n"
     << "config.tde.stride=" << r.config.tde_stride << "\n";
  if (r.protocol == Protocol::kRandom) os << "seed=" << r.seed << "\n";
}

inline void write_reports_text(std::ostream& os, const std::vector<MetricReport>& reports) {
  for (std::size_t k = 0; k < reports.size(); ++k) {
    if (k) os << "\n";
    write_report_text(os, reports[k]);
  }
}

/// Parses one JSON report document back.
inline MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.image_id = j.at("image_id").get<std::string>();
  const std::string p = j.at("protocol").get<std::string>();
  if (p == "pairwise") r.protocol = Protocol::kPairwise;
  else if (p == "human_baseline") r.protocol = Protocol::kHuman;
  else if (p == "random_baseline") r.protocol = Protocol::kRandom;
  else throw std::invalid_argument("unknown protocol '" + p + "'");
  r.pairs = j.at("pairs").get<std::size_t>();
  const auto& m = j.at("metrics");
  MetricValues& v = r.mean;
  v.lev = m.at("LEV"), v.smt = m.at("SMT"), v.hau = m.at("HAU"), v.fre = m.at("FRE"), v.dtw = m.at("DTW");
  v.tde = m.at("TDE"), v.rec = m.at("REC"), v.det = m.at("DET"), v.lam = m.at("LAM"), v.corm = m.at("CORM");
  const auto& c = j.at("config");
  r.config.grid.n_lat = c.at("grid").at("n_lat");
  r.config.grid.n_lon = c.at("grid").at("n_lon");
  r.config.scanmatch.max_score = c.at("scanmatch").at("max_score");
  r.config.scanmatch.gap_penalty = c.at("scanmatch").at("gap_penalty");
  r.config.recurrence.radius = c.at("recurrence").at("radius");
  r.config.recurrence.min_line = c.at("recurrence").at("min_line");
  r.config.tde_window = c.at("tde").at("window");
  r.config.tde_stride = c.at("tde").at("stride");
  if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

}  // namespace scankit
