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
#include <set>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "intentrec/context.hpp"
#include "intentrec/error.hpp"
#include "oracles.hpp"

using namespace intentrec;
using intentrec::testing::make_hit;

namespace {

FeatureVector features(std::vector<double> values, ReportKind kind = ReportKind::kTimeSeries) {
  return extract_features(make_hit("u", 0, "r", std::move(values), "m", "e", kind));
}

Session session_of(std::vector<HitRecord> hits) {
  Session s;
  s.user_id = hits.front().user_id;
  s.hits = std::move(hits);
  return s;
}

ContextMatrix matrix(const std::string& user, Eigen::Index cols) {
  ContextMatrix m;
  m.user_id = user;
  m.X = Eigen::MatrixXd::Random(6, cols);
  return m;
}

UserClustering single_cluster(const std::vector<std::string>& users) {
  UserClustering c;
  for (const auto& u : users) c.assignments[u] = 0;
  return c;
}

}  // namespace

TEST_CASE("extract_features time series") {
  CHECK(features({2, 5, 3, 7}) == FeatureVector{17, 7, 2, 3, 1, 3});
}

TEST_CASE("extract_features histogram keeps only the aggregate") {
  CHECK(features({4, 6}, ReportKind::kHistogram) == FeatureVector{10, 0, 0, 0, 0, 0});
}

TEST_CASE("extract_features singleton and empty series") {
  CHECK(features({5}) == FeatureVector{5, 5, 5, 0, 0, 0});
  CHECK_THROWS_AS(features({}), ArgumentError);
}

TEST_CASE("extract_features longest positive run") {
  CHECK(features({1, 2, 3, 4, 0, 1})[4] == 3);
}

TEST_CASE("reversing a series leaves the first three slots unchanged") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(2 + trial % 9);
    for (auto& x : v) x = val(rng);
    std::vector<double> r(v.rbegin(), v.rend());
    const auto a = features(v), b = features(r);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
    CHECK(a[1] == b[1]);
    CHECK(a[2] == b[2]);
  }
}

TEST_CASE("build_matrix shapes and segments") {
  const auto s = session_of({make_hit("u", 0, "r1", {1, 2}, "m", "a"),
                             make_hit("u", 1, "r2", {3}, "m", "b"),
                             make_hit("u", 2, "r3", {4, 1}, "m", "a")});
  const ContextMatrix m = build_matrix({s});
  CHECK(m.layout.pair_count() == 2);
  CHECK(m.layout.rows() == 12);
  CHECK(m.X.rows() == 12);
  CHECK(m.X.cols() == 3);
  // The second view touches pair #2, so the first segment is zero.
  CHECK(m.X.col(1).head(6).isZero());
  CHECK(m.X(6, 1) == 3);
  CHECK(m.layout.slot_of({"m", "b"}) == 1);
  CHECK(m.layout.slot_of({"x", "y"}) == -1);
}

TEST_CASE("build_matrix histogram column") {
  const auto s = session_of({make_hit("u", 0, "r", {1, 2}, "m", "e", ReportKind::kHistogram)});
  const ContextMatrix m = build_matrix({s});
  REQUIRE(m.X.rows() == 6);
  Eigen::VectorXd expected(6);
  expected << 3, 0, 0, 0, 0, 0;
  CHECK(m.X.col(0) == expected);
}

TEST_CASE("build_matrix layout is lexicographic and counts elements per metric") {
  const auto s = session_of({make_hit("u", 0, "r", {1}, "zeta", "b"),
                             make_hit("u", 1, "r", {1}, "alpha", "y"),
                             make_hit("u", 2, "r", {1}, "alpha", "x")});
  const ContextMatrix m = build_matrix({s});
  REQUIRE(m.layout.slots.size() == 3);
  CHECK(m.layout.slots[0] == MetricElement{"alpha", "x"});
  CHECK(m.layout.slots[2] == MetricElement{"zeta", "b"});
  CHECK(m.layout.metric_count() == 2);
  CHECK(m.layout.elements_per_metric.at("alpha") == 2);
  CHECK(FeatureLayout::from_json(m.layout.to_json()).slots == m.layout.slots);
}

TEST_CASE("every context column has one aligned six-slot segment") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> metric(0, 2), elem(0, 3), len(1, 6);
  std::uniform_real_distribution<double> val(0.5, 5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<HitRecord> hits;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> v(len(rng));
      for (auto& x : v) x = val(rng);
      hits.push_back(make_hit("u", i, "r", v, "m" + std::to_string(metric(rng)),
                              "e" + std::to_string(elem(rng)),
                              i % 3 == 0 ? ReportKind::kHistogram : ReportKind::kTimeSeries));
    }
    const ContextMatrix m = build_matrix({session_of(hits)});
    for (Eigen::Index c = 0; c < m.X.cols(); ++c) {
      std::set<Eigen::Index> segments;
      for (Eigen::Index r = 0; r < m.X.rows(); ++r) {
        if (m.X(r, c) != 0.0) segments.insert(r / 6);
      }
      CHECK(segments.size() <= 1);
    }
  }
}

TEST_CASE("cluster_users separates four distant users") {
  std::vector<UsageFeatures> users = {{"a", 0, 0, 0}, {"b", 1000, 0, 0}, {"c", 0, 1000, 0},
                                      {"d", 0, 0, 1000}};
  const UserClustering c = cluster_users(users, 1);
  std::set<int> ids;
  for (const auto& [_, k] : c.assignments) ids.insert(k);
  CHECK(ids.size() == 4);
  CHECK(c.cluster_of("a") == 0);
  CHECK_FALSE(c.insufficient);
}

TEST_CASE("cluster_users identical users share one cluster") {
  std::vector<UsageFeatures> users;
  for (int i = 0; i < 6; ++i) users.push_back({"u" + std::to_string(i), 5, 5, 5});
  const UserClustering c = cluster_users(users, 1);
  std::set<int> ids;
  for (const auto& [_, k] : c.assignments) ids.insert(k);
  CHECK(ids.size() == 1);
  int empty = 0;
  for (bool e : c.empty) empty += e;
  CHECK(empty == 3);
}

TEST_CASE("cluster_users with three users is flagged") {
  const UserClustering c = cluster_users({{"a", 1, 2, 3}, {"b", 4, 5, 6}, {"c", 7, 8, 9}}, 1);
  CHECK(c.insufficient);
  for (const auto& [_, k] : c.assignments) CHECK(k == 0);
}

TEST_CASE("cluster_users objective is non-increasing and ranks by activity") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<UsageFeatures> users;
    for (int i = 0; i < 40; ++i) {
      const double scale = 1 + (i % 4) * 5;
      users.push_back({"u" + std::to_string(i), scale * (100 + 20 * unit(rng)),
                       scale * (10 + 2 * unit(rng)), scale * (5 + unit(rng))});
    }
    const UserClustering c = cluster_users(users, static_cast<std::uint64_t>(trial));
    for (std::size_t i = 1; i < c.objective_trace.size(); ++i) {
      CHECK(c.objective_trace[i] <= c.objective_trace[i - 1] + 1e-9);
    }
    double prev = -1e300;
    for (int k = 0; k < kExperienceGroups; ++k) {
      if (c.empty[static_cast<std::size_t>(k)]) continue;
      const double activity = c.centroids[static_cast<std::size_t>(k)].sum();
      CHECK(activity >= prev);
      prev = activity;
    }
    CHECK(UserClustering::from_json(c.to_json()).assignments == c.assignments);
  }
}

TEST_CASE("cluster_users is deterministic for a seed") {
  std::vector<UsageFeatures> users;
  for (int i = 0; i < 12; ++i) users.push_back({"u" + std::to_string(i), i * 3.0, i % 5 * 1.0, 1.0 * (i % 3)});
  CHECK(cluster_users(users, 4).assignments == cluster_users(users, 4).assignments);
}

TEST_CASE("assemble_tensor pads cyclically") {
  const auto a = matrix("a", 3), b = matrix("b", 5);
  const ContextTensor t = assemble_tensor({b, a}, single_cluster({"a", "b"}), 0);
  REQUIRE(t.users == std::vector<std::string>{"a", "b"});
  CHECK(t.columns == 5);
  CHECK(t.original_columns == std::vector<std::size_t>{3, 5});
  CHECK(t.slices[0].cols() == 5);
  CHECK(t.slices[0].col(3) == a.X.col(0));
  CHECK(t.slices[0].col(4) == a.X.col(1));
  CHECK(t.slices[1] == b.X);
}

TEST_CASE("assemble_tensor single member and equal lengths") {
  const auto a = matrix("a", 4), b = matrix("b", 4);
  CHECK(assemble_tensor({a}, single_cluster({"a"}), 0).slices[0] == a.X);
  const auto t = assemble_tensor({a, b}, single_cluster({"a", "b"}), 0);
  CHECK(t.slices[0] == a.X);
  CHECK(t.slices[1] == b.X);
}

TEST_CASE("assemble_tensor on an empty cluster") {
  CHECK_THROWS_AS(assemble_tensor({matrix("a", 2)}, single_cluster({"a"}), 2), DataError);
}

TEST_CASE("padding keeps the set of distinct columns") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index cols = 1 + trial % 7;
    const ContextMatrix m = matrix("a", cols);
    const Eigen::MatrixXd P = pad_cyclic(m.X, 11);
    std::set<std::vector<double>> before, after;
    for (Eigen::Index c = 0; c < m.X.cols(); ++c) {
      before.insert(std::vector<double>(m.X.col(c).data(), m.X.col(c).data() + 6));
    }
    for (Eigen::Index c = 0; c < P.cols(); ++c) {
      after.insert(std::vector<double>(P.col(c).data(), P.col(c).data() + 6));
    }
    CHECK(before == after);
  }
}
