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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "intentrec/context.hpp"
#include "intentrec/navgraph.hpp"

namespace intentrec {

inline constexpr std::size_t kDefaultTopK = 10;
inline constexpr double kDefaultFeedbackRate = 0.1;
inline constexpr double kMinFeedbackFactor = 0.01;

enum class RelevanceVariant { kSumI, kMaxI, kMaxIxD, kDotIxD };

std::string to_string(RelevanceVariant v);
// Accepts "Sum-I", "Max-I", "Max-IxD", "Dot-IxD" (case-insensitive, dashes optional).
RelevanceVariant variant_from_string(const std::string& s);

// R_v from the intent scores of the current context and the candidate's
// path probabilities to each target. Every variant ranges over the intents
// reachable from the candidate that also have a score.
double relevance(RelevanceVariant variant, const std::map<std::string, double>& intent_scores,
                 const std::map<std::string, double>& distances);

struct Candidate {
  std::string node;
  double W = 0.0;   // edge weight, or best two-edge path product
  int step = 1;
  std::string via;  // intermediate node of a two-step candidate
};

// Successors of `current`, then nodes two edges away that are neither
// `current` nor a direct successor. Throws LookupError if `current` is absent.
std::vector<Candidate> candidates(const NavGraph& graph, const std::string& current);

struct Recommendation {
  std::string node;
  double K = 0.0;
  double R = 0.0;
  double W = 0.0;
  double M = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  bool collaborative = false;
  std::string source_user;
  int step = 1;
  std::string via;

  // alpha * W * R + beta * M
  double recompute() const { return alpha * W * R + beta * M; }
};

// Intent distances of every node, keyed by source node.
using DistanceTable = std::map<std::string, IntentDistances>;
DistanceTable all_intent_distances(const NavGraph& graph);

// Scores every candidate with K = alpha * W * R + beta * M. `table` may be
// null, in which case distances are computed on demand.
std::vector<Recommendation> score_candidates(const NavGraph& graph, const std::string& current,
                                             const std::map<std::string, double>& intent_scores,
                                             RelevanceVariant variant,
                                             const DistanceTable* table = nullptr);

// K desc, own graph first, R desc, W desc, M desc, node id asc; top k.
bool ranks_before(const Recommendation& a, const Recommendation& b);
std::vector<Recommendation> rank(std::vector<Recommendation> recs, std::size_t k = kDefaultTopK);

struct GraphSet {
  std::map<std::string, NavGraph> graphs;  // by user
  std::map<std::string, DistanceTable> distances;  // optional cache, by user
};

// Candidates from graphs of users in clusters at least as experienced as
// `user`'s that contain `current` and a target. R uses `intent_scores`;
// W, M and distances come from the source graph. Only nodes outside the
// user's own graph are kept, each once with its best K.
std::vector<Recommendation> group_recommend(const std::string& user, const UserClustering& clustering,
                                            const GraphSet& graphs, const std::string& current,
                                            const std::map<std::string, double>& intent_scores,
                                            RelevanceVariant variant);

enum class FeedbackKind { kExplicitPositive, kExplicitNegative, kImplicitPositive, kImplicitNegative };

struct FeedbackEvent {
  FeedbackKind kind;
  std::string node;  // unused for kImplicitNegative
};

// Multiplicative updates of alpha and beta, floored at kMinFeedbackFactor.
// Two-step nodes move half as far from 1. Nodes absent from `graph` are
// left alone.
void apply_feedback(NavGraph& graph, const std::vector<Recommendation>& shown,
                    const FeedbackEvent& event, double eta = kDefaultFeedbackRate);

nlohmann::json recommendation_to_json(const Recommendation& r);
nlohmann::json recommendations_to_json(const std::string& user, const std::string& current,
                                       std::size_t k, const std::vector<Recommendation>& recs,
                                       RelevanceVariant variant);

}  // namespace intentrec
