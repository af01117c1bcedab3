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
#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace intentrec {

using Timestamp = std::int64_t;

enum class ReportKind { kTimeSeries, kHistogram };

// One timestamped report access.
struct HitRecord {
  std::string user_id;
  Timestamp timestamp = 0;
  std::string report_id;
  ReportKind kind = ReportKind::kTimeSeries;
  std::string metric;
  std::string dimension_element;
  std::vector<double> values;
  std::optional<std::string> session_hint;
};

struct Session {
  std::string user_id;
  std::vector<HitRecord> hits;  // non-decreasing timestamps

  Timestamp start() const { return hits.front().timestamp; }
  Timestamp end() const { return hits.back().timestamp; }
};

struct Dataset {
  std::vector<Session> train;
  std::vector<Session> test;
  Timestamp split_instant = 0;
};

enum class HitFormat { kJsonl, kCsv };

struct ParseResult {
  std::vector<HitRecord> hits;
  std::size_t skipped = 0;
};

// Reads hit records in input order. Malformed rows are skipped and counted;
// throws FormatError when more than half of the rows are malformed and
// IoError when the stream is unreadable.
ParseResult parse_hits(std::istream& in, HitFormat format);

// Groups hits per user (sorted by user id), then splits each user's
// stable time-ordered stream on session-hint changes or, when hints are
// absent, on inter-hit gaps strictly greater than `timeout_seconds`.
std::vector<Session> sessionize(const std::vector<HitRecord>& hits,
                                Timestamp timeout_seconds = 1800);

// Picks a split instant at a session boundary so that at least
// `train_fraction` of hits precede it, keeping at least one test session.
Dataset temporal_split(const std::vector<Session>& sessions, double train_fraction = 0.7);

std::string to_string(ReportKind kind);
ReportKind report_kind_from_string(const std::string& s);

// JSONL encoding shared by the synthetic generator and the dataset files.
std::string hit_to_jsonl(const HitRecord& hit);
void write_hits_jsonl(std::ostream& out, const std::vector<HitRecord>& hits);

}  // namespace intentrec
