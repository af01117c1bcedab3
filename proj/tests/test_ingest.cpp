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

#include <random>
#include <sstream>

#include <doctest.h>

#include "intentrec/error.hpp"
#include "intentrec/ingest.hpp"
#include "oracles.hpp"

using namespace intentrec;
using intentrec::testing::make_hit;

namespace {

const char* kRow =
    R"({"user_id":"u1","ts":100,"report_id":"r1","kind":"timeseries","metric":"visits",)"
    R"("dim_element":"US","values":[1,2,3],"session":"s1"})";

ParseResult parse(const std::string& text, HitFormat f = HitFormat::kJsonl) {
  std::istringstream in(text);
  return parse_hits(in, f);
}

std::vector<Timestamp> times(const Session& s) {
  std::vector<Timestamp> out;
  for (const auto& h : s.hits) out.push_back(h.timestamp);
  return out;
}

}  // namespace

TEST_CASE("parse_hits reads one complete JSONL row") {
  const auto r = parse(std::string(kRow) + "\n");
  REQUIRE(r.hits.size() == 1);
  CHECK(r.skipped == 0);
  const HitRecord& h = r.hits[0];
  CHECK(h.user_id == "u1");
  CHECK(h.timestamp == 100);
  CHECK(h.report_id == "r1");
  CHECK(h.kind == ReportKind::kTimeSeries);
  CHECK(h.metric == "visits");
  CHECK(h.dimension_element == "US");
  CHECK(h.values == std::vector<double>{1, 2, 3});
  REQUIRE(h.session_hint.has_value());
  CHECK(*h.session_hint == "s1");
}

TEST_CASE("parse_hits on an empty stream") {
  const auto r = parse("");
  CHECK(r.hits.empty());
  CHECK(r.skipped == 0);
}

TEST_CASE("parse_hits skips a row without report_id") {
  const std::string bad =
      R"({"user_id":"u1","ts":5,"kind":"histogram","metric":"m","dim_element":"e","values":[1]})";
  const auto r = parse(std::string(kRow) + "\n" + bad + "\n" + kRow + "\n");
  CHECK(r.hits.size() == 2);
  CHECK(r.skipped == 1);
}

TEST_CASE("parse_hits rejects a mostly malformed stream") {
  CHECK_THROWS_AS(parse("{}\nnot json\n" + std::string(kRow) + "\n"), FormatError);
}

TEST_CASE("parse_hits reads CSV with semicolon-joined values") {
  const std::string csv =
      "user_id,ts,report_id,kind,metric,dim_element,values,session\n"
      "u1,10,r1,histogram,m,e,4;6,\n"
      "u1,20,r2,timeseries,m,f,1;2;3,x\n";
  const auto r = parse(csv, HitFormat::kCsv);
  REQUIRE(r.hits.size() == 2);
  CHECK(r.hits[0].kind == ReportKind::kHistogram);
  CHECK(r.hits[0].values == std::vector<double>{4, 6});
  CHECK_FALSE(r.hits[0].session_hint.has_value());
  CHECK(r.hits[1].values == std::vector<double>{1, 2, 3});
  CHECK(*r.hits[1].session_hint == "x");
}

TEST_CASE("JSONL output parses back to the same hit") {
  HitRecord h = make_hit("u", 42, "rep", {1.5, -2.25}, "met", "el", ReportKind::kHistogram);
  h.session_hint = "abc";
  const auto r = parse(hit_to_jsonl(h) + "\n");
  REQUIRE(r.hits.size() == 1);
  CHECK(r.hits[0].values == h.values);
  CHECK(r.hits[0].kind == h.kind);
  CHECK(*r.hits[0].session_hint == "abc");
}

TEST_CASE("sessionize splits on gaps above the timeout") {
  const auto s = sessionize({make_hit("u", 0, "a"), make_hit("u", 600, "b"), make_hit("u", 3000, "c")},
                            1800);
  REQUIRE(s.size() == 2);
  CHECK(times(s[0]) == std::vector<Timestamp>{0, 600});
  CHECK(times(s[1]) == std::vector<Timestamp>{3000});
}

TEST_CASE("sessionize of a single hit") {
  const auto s = sessionize({make_hit("u", 7, "a")});
  REQUIRE(s.size() == 1);
  CHECK(s[0].hits.size() == 1);
}

TEST_CASE("sessionize separates interleaved users") {
  const auto s = sessionize({make_hit("a", 0, "x"), make_hit("b", 1, "y"), make_hit("a", 2, "z"),
                             make_hit("b", 3, "w")});
  REQUIRE(s.size() == 2);
  for (const auto& session : s) {
    CHECK(session.hits.size() == 2);
    for (const auto& h : session.hits) CHECK(h.user_id == session.user_id);
  }
}

TEST_CASE("sessionize follows session hints instead of gaps") {
  auto a = make_hit("u", 0, "a");
  auto b = make_hit("u", 5000, "b");
  auto c = make_hit("u", 5001, "c");
  a.session_hint = b.session_hint = "s1";
  c.session_hint = "s2";
  const auto s = sessionize({a, b, c}, 1800);
  REQUIRE(s.size() == 2);
  CHECK(s[0].hits.size() == 2);
}

TEST_CASE("sessionize rejects a non-positive timeout") {
  CHECK_THROWS_AS(sessionize({}, 0), ArgumentError);
  CHECK(sessionize({}).empty());
}

TEST_CASE("sessionize keeps input order for equal timestamps") {
  const auto s = sessionize({make_hit("u", 5, "first"), make_hit("u", 5, "second")});
  REQUIRE(s.size() == 1);
  CHECK(s[0].hits[0].report_id == "first");
  CHECK(s[0].hits[1].report_id == "second");
}

TEST_CASE("sessionize properties on random logs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> user(0, 4), gap(0, 4000);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<HitRecord> hits;
    std::map<std::string, Timestamp> clock;
    for (int i = 0; i < 80; ++i) {
      const std::string u = "u" + std::to_string(user(rng));
      clock[u] += gap(rng);
      hits.push_back(make_hit(u, clock[u], "r" + std::to_string(i)));
    }
    const auto sessions = sessionize(hits, 1800);
    std::map<std::string, std::vector<std::string>> concat, expected;
    for (const auto& h : hits) expected[h.user_id].push_back(h.report_id);
    for (const auto& s : sessions) {
      for (std::size_t i = 0; i < s.hits.size(); ++i) {
        concat[s.user_id].push_back(s.hits[i].report_id);
        if (i > 0) CHECK(s.hits[i].timestamp - s.hits[i - 1].timestamp <= 1800);
      }
    }
    CHECK(concat == expected);
  }
}

TEST_CASE("temporal_split on ten single-hit sessions") {
  std::vector<Session> sessions;
  for (int t = 1; t <= 10; ++t) sessions.push_back(Session{"u", {make_hit("u", t, "r")}});
  const Dataset d = temporal_split(sessions, 0.7);
  REQUIRE(d.train.size() == 7);
  REQUIRE(d.test.size() == 3);
  for (const auto& s : d.train) CHECK(s.start() < d.split_instant);
  for (const auto& s : d.test) CHECK(s.start() >= d.split_instant);
  CHECK(d.test.front().start() == 8);
}

TEST_CASE("temporal_split keeps one test session for extreme fractions") {
  const std::vector<Session> sessions = {Session{"u", {make_hit("u", 1, "a")}},
                                         Session{"u", {make_hit("u", 2, "b")}}};
  const Dataset d = temporal_split(sessions, 0.999);
  CHECK(d.train.size() == 1);
  CHECK(d.test.size() == 1);
}

TEST_CASE("temporal_split argument errors") {
  const std::vector<Session> one = {Session{"u", {make_hit("u", 1, "a")}}};
  CHECK_THROWS_AS(temporal_split(one, 0.7), ArgumentError);
  const std::vector<Session> two = {Session{"u", {make_hit("u", 1, "a")}},
                                    Session{"u", {make_hit("u", 2, "b")}}};
  CHECK_THROWS_AS(temporal_split(two, 0.0), ArgumentError);
  CHECK_THROWS_AS(temporal_split(two, 1.0), ArgumentError);
}

TEST_CASE("temporal_split conserves hits and assigns straddling sessions to train") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto sessions = intentrec::testing::random_sessions(rng, 6, 12, 5);
    std::size_t total = 0;
    for (const auto& s : sessions) total += s.hits.size();
    const Dataset d = temporal_split(sessions, 0.7);
    std::size_t train = 0, test = 0;
    for (const auto& s : d.train) train += s.hits.size();
    for (const auto& s : d.test) test += s.hits.size();
    CHECK(train + test == total);
    if (d.test.size() > 1) {
      CHECK(static_cast<double>(train) >= 0.7 * static_cast<double>(total) - 1e-9);
    }
    for (const auto& s : d.train) CHECK(s.start() < d.split_instant);
    for (const auto& s : d.test) {
      for (const auto& h : s.hits) CHECK(h.timestamp >= d.split_instant);
    }
  }
}
