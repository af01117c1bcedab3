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

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "intentrec/ingest.hpp"
#include "intentrec/recommender.hpp"
#include "intentrec/system.hpp"

namespace intentrec {

inline constexpr std::size_t kDefaultMinUniqueReports = 5;

// Binary relevance with a single relevant item, so the ideal DCG is 1.
double ndcg_at_k(const std::vector<std::string>& shown, const std::string& truth,
                 std::size_t k = kDefaultTopK);
// (hits / k, hits), hits in {0, 1}.
std::pair<double, double> precision_recall_at_k(const std::vector<std::string>& shown,
                                                const std::string& truth,
                                                std::size_t k = kDefaultTopK);

struct AucEvent {
  std::string user;
  std::optional<double> positive;  // score of the true next report, if it was a candidate
  std::vector<double> negatives;
};

// Fraction of negatives strictly below the positive plus half the ties;
// 0 without a positive, 1 with a positive and no negatives.
double event_auc(const AucEvent& event);
// Per-user mean event AUC, averaged with weights equal to event counts.
double weighted_auc(const std::vector<AucEvent>& events);

enum class Method { kMass, kFrequency, kContext, kParafac2, kMaxIxD, kDotIxD, kMaxI, kSumI };

const std::vector<Method>& all_methods();
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct EvalReport {
  std::string method;
  double ndcg = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double wauc = 0.0;
  std::size_t events = 0;
};

struct BenchmarkOptions {
  std::size_t k = kDefaultTopK;
  std::size_t min_unique_reports = kDefaultMinUniqueReports;
  bool group_recommendations = false;  // novices also get candidates from experienced users
  std::vector<Method> methods = all_methods();
};

struct BenchmarkResult {
  std::vector<EvalReport> reports;  // in the order of BenchmarkOptions::methods
  std::size_t users = 0;            // users contributing events
  std::size_t skipped_unseen = 0;   // events whose current report is not in the user's graph
  std::size_t filtered_users = 0;   // below min_unique_reports
};

// Every full candidate list for one method at one event, before truncation.
std::vector<Recommendation> method_candidates(const TrainedSystem& sys, const std::string& user,
                                              const std::string& current, Method method,
                                              const ViewFactors* factors, bool group);

// One event per consecutive pair of distinct reports in each test session.
BenchmarkResult run_benchmark(const TrainedSystem& sys, const std::vector<Session>& test,
                              const BenchmarkOptions& options);

void write_results_csv(std::ostream& out, const std::vector<EvalReport>& reports);
std::string format_table(const std::vector<EvalReport>& reports);

}  // namespace intentrec
