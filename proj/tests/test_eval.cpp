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

#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "intentrec/error.hpp"
#include "intentrec/eval.hpp"
#include "oracles.hpp"

using namespace intentrec;

namespace {

std::vector<std::string> shown_with(const std::string& truth, int rank, int n = 10) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(i == rank ? truth : "x" + std::to_string(i));
  return out;
}

AucEvent event(const std::string& user, std::optional<double> pos, std::vector<double> neg) {
  return AucEvent{user, pos, std::move(neg)};
}

// A -> B with weight 1 for one user, no factors.
TrainedSystem chain_system() {
  TrainedSystem sys;
  NavGraph g("u");
  g.set_edge("A", "B", 1.0, 5);
  g.node("A").mass = 0.5;
  g.node("B").mass = 0.5;
  detect_targets(g);
  sys.graphs.graphs.emplace("u", g);
  UserModel m;
  m.user_id = "u";
  sys.users.emplace("u", m);
  return sys;
}

}  // namespace

TEST_CASE("ndcg_at_k hand values") {
  CHECK(ndcg_at_k(shown_with("t", 1), "t") == 1.0);
  CHECK(std::abs(ndcg_at_k(shown_with("t", 2), "t") - 1.0 / std::log2(3.0)) < 1e-12);
  CHECK(ndcg_at_k(shown_with("t", 0), "t") == 0.0);
  CHECK(ndcg_at_k(shown_with("t", 4), "t", 3) == 0.0);
  CHECK_THROWS_AS(ndcg_at_k({}, "t", 0), ArgumentError);
}

TEST_CASE("ndcg is monotone in rank and bounded") {
  double prev = 2.0;
  for (int r = 1; r <= 11; ++r) {
    const double v = ndcg_at_k(shown_with("t", r, 11), "t");
    CHECK(v <= prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("precision and recall") {
  const auto hit = precision_recall_at_k(shown_with("t", 3), "t");
  CHECK(hit.first == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(hit.second == 1.0);
  const auto miss = precision_recall_at_k(shown_with("t", 0), "t");
  CHECK(miss.first == 0.0);
  CHECK(miss.second == 0.0);
  double p = 0, r = 0;
  for (int rank : {1, 0, 5}) {
    const auto pr = precision_recall_at_k(shown_with("t", rank), "t");
    p += pr.first / 3;
    r += pr.second / 3;
  }
  CHECK(p == doctest::Approx(0.0667).epsilon(1e-3));
  CHECK(r == doctest::Approx(0.6667).epsilon(1e-3));
}

TEST_CASE("precision equals recall over k for a single relevant item") {
  for (int rank = 0; rank <= 12; ++rank) {
    for (std::size_t k : {1u, 5u, 10u}) {
      const auto [p, r] = precision_recall_at_k(shown_with("t", rank, 12), "t", k);
      CHECK(p == doctest::Approx(r / static_cast<double>(k)).epsilon(1e-15));
    }
  }
}

TEST_CASE("event_auc hand values") {
  CHECK(event_auc(event("u", 1.0, std::vector<double>(9, 0.5))) == 1.0);
  CHECK(event_auc(event("u", 0.5, std::vector<double>(9, 0.5))) == 0.5);
  CHECK(event_auc(event("u", 0.5, {0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.9, 0.8, 0.7})) ==
        doctest::Approx(6.0 / 9.0).epsilon(1e-12));
  CHECK(event_auc(event("u", std::nullopt, {0.1, 0.2})) == 0.0);
}

TEST_CASE("weighted_auc weights users by their event count") {
  // User a: mean AUC 1 over 3 events; user b: AUC 0 over 1 event.
  const std::vector<AucEvent> events = {event("a", 1.0, {0.0}), event("a", 1.0, {0.0}),
                                        event("a", 1.0, {0.0}), event("b", 0.0, {1.0})};
  CHECK(weighted_auc(events) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(weighted_auc({}) == 0.0);
}

TEST_CASE("weighted_auc matches pair counting and is invariant under monotone transforms") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> count(1, 12), user(0, 4);
  std::vector<AucEvent> events, squashed, cubed;
  for (int e = 0; e < 100; ++e) {
    AucEvent a;
    a.user = "u" + std::to_string(user(rng));
    if (e % 7 != 0) a.positive = std::round(gauss(rng) * 4) / 4;
    for (int i = count(rng); i > 0; --i) a.negatives.push_back(std::round(gauss(rng) * 4) / 4);
    if (a.positive) {
      CHECK(event_auc(a) == doctest::Approx(testing::pair_count_auc(*a.positive, a.negatives)));
    }
    auto s = a, c = a;
    auto f = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    auto g = [](double x) { return x * x * x + 5.0; };
    if (a.positive) {
      s.positive = f(*a.positive);
      c.positive = g(*a.positive);
    }
    for (std::size_t i = 0; i < a.negatives.size(); ++i) {
      s.negatives[i] = f(a.negatives[i]);
      c.negatives[i] = g(a.negatives[i]);
    }
    events.push_back(a);
    squashed.push_back(s);
    cubed.push_back(c);
  }
  const double base = weighted_auc(events);
  CHECK(base >= 0.0);
  CHECK(base <= 1.0);
  CHECK(std::abs(weighted_auc(squashed) - base) < 1e-12);
  CHECK(std::abs(weighted_auc(cubed) - base) < 1e-12);
}

TEST_CASE("method names round trip") {
  CHECK(all_methods().size() == 8);
  for (Method m : all_methods()) CHECK(method_from_string(to_string(m)) == m);
  CHECK(to_string(Method::kSumI) == "Sum-I");
  CHECK_THROWS_AS(method_from_string("Oracle"), ArgumentError);
}

TEST_CASE("Frequency on a deterministic chain is perfect") {
  const TrainedSystem sys = chain_system();
  std::vector<Session> test;
  for (int i = 0; i < 4; ++i) test.push_back(testing::make_session("u", {"A", "B"}, i * 10000));
  BenchmarkOptions o;
  o.min_unique_reports = 1;
  o.methods = {Method::kFrequency, Method::kMass};
  const auto result = run_benchmark(sys, test, o);
  REQUIRE(result.reports.size() == 2);
  CHECK(result.reports[0].method == "Frequency");
  CHECK(result.reports[0].ndcg == 1.0);
  CHECK(result.reports[0].recall == 1.0);
  CHECK(result.reports[0].events == 4);
  CHECK(result.users == 1);
}

TEST_CASE("benchmark skips unseen reports and filters small graphs") {
  const TrainedSystem sys = chain_system();
  BenchmarkOptions o;
  o.min_unique_reports = 1;
  const auto skipped = run_benchmark(sys, {testing::make_session("u", {"Z", "A", "B"})}, o);
  CHECK(skipped.skipped_unseen == 1);
  CHECK(skipped.reports.at(0).events == 1);
  o.min_unique_reports = 5;
  const auto filtered = run_benchmark(sys, {testing::make_session("u", {"A", "B"})}, o);
  CHECK(filtered.filtered_users == 1);
  CHECK(filtered.reports.empty());
}

TEST_CASE("empty test set gives an empty table") {
  const auto result = run_benchmark(chain_system(), {}, BenchmarkOptions{});
  CHECK(result.reports.empty());
  std::ostringstream csv;
  write_results_csv(csv, result.reports);
  CHECK(csv.str() == "method,ndcg,precision,recall,wauc,events\n");
}

TEST_CASE("results.csv layout") {
  EvalReport r;
  r.method = "Sum-I";
  r.ndcg = 0.5;
  r.precision = 0.1;
  r.recall = 0.75;
  r.wauc = 0.625;
  r.events = 12;
  std::ostringstream csv;
  write_results_csv(csv, {r});
  CHECK(csv.str() ==
        "method,ndcg,precision,recall,wauc,events\nSum-I,0.500000,0.100000,0.750000,0.625000,12\n");
  const std::string table = format_table({r});
  CHECK(table.find("Sum-I") != std::string::npos);
  CHECK(table.find("w-AUC") != std::string::npos);
}
