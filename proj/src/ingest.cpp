// Copyright 2026 The intentrec Authors
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
#include "intentrec/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "intentrec/error.hpp"

namespace intentrec {
namespace {

using nlohmann::json;

std::optional<HitRecord> hit_from_json(const json& j) {
  if (!j.is_object()) return std::nullopt;
  for (const char* key : {"user_id", "ts", "report_id", "kind", "metric", "dim_element", "values"}) {
    if (!j.contains(key)) return std::nullopt;
  }
  HitRecord h;
  if (!j["user_id"].is_string() || !j["report_id"].is_string() || !j["metric"].is_string() ||
      !j["dim_element"].is_string() || !j["kind"].is_string() || !j["ts"].is_number_integer() ||
      !j["values"].is_array()) {
    return std::nullopt;
  }
  h.user_id = j["user_id"].get<std::string>();
  h.report_id = j["report_id"].get<std::string>();
  h.metric = j["metric"].get<std::string>();
  h.dimension_element = j["dim_element"].get<std::string>();
  h.timestamp = j["ts"].get<Timestamp>();
  try {
    h.kind = report_kind_from_string(j["kind"].get<std::string>());
  } catch (const DataError&) {
    return std::nullopt;
  }
  for (const auto& v : j["values"]) {
    if (!v.is_number()) return std::nullopt;
    h.values.push_back(v.get<double>());
  }
  if (j.contains("session") && !j["session"].is_null()) {
    if (!j["session"].is_string()) return std::nullopt;
    h.session_hint = j["session"].get<std::string>();
  }
  return h;
}

bool valid(const HitRecord& h) {
  if (h.user_id.empty() || h.report_id.empty() || h.timestamp < 0 || h.values.empty()) return false;
  return std::all_of(h.values.begin(), h.values.end(), [](double v) { return std::isfinite(v); });
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<HitRecord> hit_from_csv(const std::vector<std::string>& f,
                                      const std::map<std::string, std::size_t>& col) {
  auto get = [&](const std::string& name) -> const std::string* {
    auto it = col.find(name);
    if (it == col.end() || it->second >= f.size()) return nullptr;
    return &f[it->second];
  };
  HitRecord h;
  const std::string *user = get("user_id"), *ts = get("ts"), *report = get("report_id"),
                    *kind = get("kind"), *metric = get("metric"), *dim = get("dim_element"),
                    *values = get("values");
  if (!user || !ts || !report || !kind || !metric || !dim || !values) return std::nullopt;
  h.user_id = *user;
  h.report_id = *report;
  h.metric = *metric;
  h.dimension_element = *dim;
  if (!parse_number(*ts, h.timestamp)) return std::nullopt;
  try {
    h.kind = report_kind_from_string(*kind);
  } catch (const DataError&) {
    return std::nullopt;
  }
  std::stringstream ss(*values);
  std::string item;
  while (std::getline(ss, item, ';')) {
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) return std::nullopt;
    h.values.push_back(v);
  }
  if (const std::string* s = get("session"); s && !s->empty()) h.session_hint = *s;
  return h;
}

}  // namespace

std::string to_string(ReportKind kind) {
  return kind == ReportKind::kTimeSeries ? "timeseries" : "histogram";
}

ReportKind report_kind_from_string(const std::string& s) {
  if (s == "timeseries") return ReportKind::kTimeSeries;
  if (s == "histogram") return ReportKind::kHistogram;
  throw DataError("unknown report kind: " + s);
}

ParseResult parse_hits(std::istream& in, HitFormat format) {
  if (!in.good() && !in.eof()) throw IoError("hit stream is not readable");
  ParseResult result;
  std::size_t rows = 0;
  std::string line;
  std::map<std::string, std::size_t> columns;
  bool header_seen = format == HitFormat::kJsonl;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header_seen) {
      auto names = split_csv_line(line);
      for (std::size_t i = 0; i < names.size(); ++i) columns[names[i]] = i;
      header_seen = true;
      continue;
    }
    ++rows;
    std::optional<HitRecord> hit;
    if (format == HitFormat::kJsonl) {
      json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (!j.is_discarded()) hit = hit_from_json(j);
    } else {
      hit = hit_from_csv(split_csv_line(line), columns);
    }
    if (hit && valid(*hit)) {
      result.hits.push_back(std::move(*hit));
    } else {
      ++result.skipped;
    }
  }
  if (in.bad()) throw IoError("read failure on hit stream");
  if (rows > 0 && 2 * result.skipped > rows) {
    throw FormatError(std::to_string(result.skipped) + " of " + std::to_string(rows) +
                      " rows are malformed");
  }
  return result;
}

std::vector<Session> sessionize(const std::vector<HitRecord>& hits, Timestamp timeout_seconds) {
  if (timeout_seconds <= 0) throw ArgumentError("session timeout must be positive");
  std::map<std::string, std::vector<const HitRecord*>> per_user;
  for (const auto& h : hits) per_user[h.user_id].push_back(&h);

  std::vector<Session> sessions;
  for (auto& [user, list] : per_user) {
    std::stable_sort(list.begin(), list.end(), [](const HitRecord* a, const HitRecord* b) {
      return a->timestamp < b->timestamp;
    });
    Session current{user, {}};
    for (const HitRecord* h : list) {
      if (!current.hits.empty()) {
        const HitRecord& prev = current.hits.back();
        bool split = false;
        if (h->session_hint || prev.session_hint) {
          split = h->session_hint != prev.session_hint;
        } else {
          split = h->timestamp - prev.timestamp > timeout_seconds;
        }
        if (split) {
          sessions.push_back(std::move(current));
          current = Session{user, {}};
        }
      }
      current.hits.push_back(*h);
    }
    if (!current.hits.empty()) sessions.push_back(std::move(current));
  }
  return sessions;
}

Dataset temporal_split(const std::vector<Session>& sessions, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train_fraction must lie in (0, 1)");
  }
  if (sessions.size() < 2) throw ArgumentError("need at least two sessions for a non-empty test set");

  std::size_t total = 0;
  std::map<Timestamp, std::size_t> hits_by_start;
  for (const auto& s : sessions) {
    total += s.hits.size();
    hits_by_start[s.start()] += s.hits.size();
  }
  if (hits_by_start.size() < 2) {
    throw ArgumentError("all sessions start at the same instant; cannot split");
  }

  // Candidate instants are session starts; sessions starting before the
  // instant (including those that straddle it) belong to train.
  Timestamp split = hits_by_start.rbegin()->first;
  std::size_t before = 0;
  const double needed = train_fraction * static_cast<double>(total);
  for (const auto& [start, count] : hits_by_start) {
    if (static_cast<double>(before) + 1e-9 >= needed && before > 0) {
      split = start;
      break;
    }
    before += count;
  }

  Dataset ds;
  ds.split_instant = split;
  for (const auto& s : sessions) {
    (s.start() < split ? ds.train : ds.test).push_back(s);
  }
  return ds;
}

std::string hit_to_jsonl(const HitRecord& hit) {
  json j;
  j["user_id"] = hit.user_id;
  j["ts"] = hit.timestamp;
  j["report_id"] = hit.report_id;
  j["kind"] = to_string(hit.kind);
  j["metric"] = hit.metric;
  j["dim_element"] = hit.dimension_element;
  j["values"] = hit.values;
  if (hit.session_hint) j["session"] = *hit.session_hint;
  return j.dump();
}

void write_hits_jsonl(std::ostream& out, const std::vector<HitRecord>& hits) {
  for (const auto& h : hits) out << hit_to_jsonl(h) << '\n';
}

}  // namespace intentrec
