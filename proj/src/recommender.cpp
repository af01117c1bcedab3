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

#include "intentrec/recommender.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "intentrec/error.hpp"

namespace intentrec {

std::string to_string(RelevanceVariant v) {
  switch (v) {
    case RelevanceVariant::kSumI: return "Sum-I";
    case RelevanceVariant::kMaxI: return "Max-I";
    case RelevanceVariant::kMaxIxD: return "Max-IxD";
    case RelevanceVariant::kDotIxD: return "Dot-IxD";
  }
  return "Sum-I";
}

RelevanceVariant variant_from_string(const std::string& s) {
  std::string key;
  for (char c : s) {
    if (c != '-' && c != '_') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (key == "sumi") return RelevanceVariant::kSumI;
  if (key == "maxi") return RelevanceVariant::kMaxI;
  if (key == "maxixd") return RelevanceVariant::kMaxIxD;
  if (key == "dotixd") return RelevanceVariant::kDotIxD;
  throw ArgumentError("unknown relevance variant: " + s);
}

double relevance(RelevanceVariant variant, const std::map<std::string, double>& intent_scores,
                 const std::map<std::string, double>& distances) {
  if (intent_scores.empty()) {
    spdlog::warn("relevance: no intent scores; R_v = 0");
    return 0.0;
  }
  double sum = 0.0, max = 0.0;
  for (const auto& [intent, dist] : distances) {
    auto it = intent_scores.find(intent);
    if (it == intent_scores.end()) continue;
    const double s = it->second;
    const double term = (variant == RelevanceVariant::kMaxIxD || variant == RelevanceVariant::kDotIxD)
                            ? s * dist
                            : s;
    sum += term;
    max = std::max(max, term);
  }
  switch (variant) {
    case RelevanceVariant::kSumI:
    case RelevanceVariant::kDotIxD:
      return sum;
    case RelevanceVariant::kMaxI:
    case RelevanceVariant::kMaxIxD:
      return max;
  }
  return sum;
}

std::vector<Candidate> candidates(const NavGraph& graph, const std::string& current) {
  if (!graph.contains(current)) throw LookupError("recommender: node " + current + " not in graph");
  std::vector<Candidate> out;
  const auto& first = graph.successors(current);
  for (const auto& [v, e] : first) out.push_back({v, e.weight, 1, ""});
  std::map<std::string, Candidate> second;
  for (const auto& [v, e1] : first) {
    for (const auto& [w, e2] : graph.successors(v)) {
      if (w == current || first.count(w)) continue;
      const double p = e1.weight * e2.weight;
      auto it = second.find(w);
      if (it == second.end() || p > it->second.W) second[w] = {w, p, 2, v};
    }
  }
  for (auto& [w, c] : second) out.push_back(std::move(c));
  return out;
}

DistanceTable all_intent_distances(const NavGraph& graph) {
  DistanceTable table;
  for (const auto& [id, attrs] : graph.nodes()) table.emplace(id, intent_distances(graph, id));
  return table;
}

std::vector<Recommendation> score_candidates(const NavGraph& graph, const std::string& current,
                                             const std::map<std::string, double>& intent_scores,
                                             RelevanceVariant variant, const DistanceTable* table) {
  std::vector<Recommendation> out;
  for (const auto& c : candidates(graph, current)) {
    const NodeAttrs& attrs = graph.node(c.node);
    Recommendation r;
    r.node = c.node;
    r.W = c.W;
    r.M = attrs.mass;
    r.alpha = attrs.alpha;
    r.beta = attrs.beta;
    r.step = c.step;
    r.via = c.via;
    r.source_user = graph.user_id();
    if (table) {
      auto it = table->find(c.node);
      r.R = it != table->end() ? relevance(variant, intent_scores, it->second.probability) : 0.0;
    } else {
      r.R = relevance(variant, intent_scores, intent_distances(graph, c.node).probability);
    }
    r.K = r.recompute();
    out.push_back(std::move(r));
  }
  return out;
}

bool ranks_before(const Recommendation& a, const Recommendation& b) {
  if (a.K != b.K) return a.K > b.K;
  if (a.collaborative != b.collaborative) return !a.collaborative;
  if (a.R != b.R) return a.R > b.R;
  if (a.W != b.W) return a.W > b.W;
  if (a.M != b.M) return a.M > b.M;
  return a.node < b.node;
}

std::vector<Recommendation> rank(std::vector<Recommendation> recs, std::size_t k) {
  if (k < 1) throw ArgumentError("rank: k must be >= 1");
  std::stable_sort(recs.begin(), recs.end(), ranks_before);
  if (recs.size() > k) recs.resize(k);
  return recs;
}

std::vector<Recommendation> group_recommend(const std::string& user, const UserClustering& clustering,
                                            const GraphSet& graphs, const std::string& current,
                                            const std::map<std::string, double>& intent_scores,
                                            RelevanceVariant variant) {
  const int own_cluster = clustering.cluster_of(user);
  auto own_it = graphs.graphs.find(user);
  const NavGraph* own = own_it != graphs.graphs.end() ? &own_it->second : nullptr;

  std::map<std::string, Recommendation> best;
  for (const auto& [other, graph] : graphs.graphs) {
    if (other == user) continue;
    auto assigned = clustering.assignments.find(other);
    if (assigned == clustering.assignments.end() || assigned->second < own_cluster) continue;
    if (!graph.contains(current) || !graph.has_target()) continue;
    const DistanceTable* table = nullptr;
    if (auto it = graphs.distances.find(other); it != graphs.distances.end()) table = &it->second;
    for (auto& r : score_candidates(graph, current, intent_scores, variant, table)) {
      if (own && own->contains(r.node)) continue;
      r.collaborative = true;
      auto it = best.find(r.node);
      if (it == best.end() || r.K > it->second.K) best[r.node] = std::move(r);
    }
  }
  std::vector<Recommendation> out;
  out.reserve(best.size());
  for (auto& [node, r] : best) out.push_back(std::move(r));
  return out;
}

void apply_feedback(NavGraph& graph, const std::vector<Recommendation>& shown,
                    const FeedbackEvent& event, double eta) {
  if (eta < 0.0 || eta >= 1.0) throw ArgumentError("apply_feedback: eta must be in [0, 1)");
  auto scale = [&](const Recommendation& r, double multiplier) {
    if (!graph.contains(r.node)) return;
    const double m = r.step == 2 ? 1.0 + 0.5 * (multiplier - 1.0) : multiplier;
    NodeAttrs& attrs = graph.node(r.node);
    attrs.alpha = std::max(kMinFeedbackFactor, attrs.alpha * m);
    attrs.beta = std::max(kMinFeedbackFactor, attrs.beta * m);
  };

  if (event.kind == FeedbackKind::kImplicitNegative) {
    for (const auto& r : shown) scale(r, 1.0 - eta / 4.0);
    return;
  }
  auto it = std::find_if(shown.begin(), shown.end(),
                         [&](const Recommendation& r) { return r.node == event.node; });
  if (it == shown.end()) {
    throw ArgumentError("apply_feedback: node " + event.node + " was not shown");
  }
  switch (event.kind) {
    case FeedbackKind::kExplicitPositive: scale(*it, 1.0 + eta); break;
    case FeedbackKind::kExplicitNegative: scale(*it, 1.0 - eta); break;
    case FeedbackKind::kImplicitPositive: scale(*it, 1.0 + eta / 2.0); break;
    case FeedbackKind::kImplicitNegative: break;
  }
}

nlohmann::json recommendation_to_json(const Recommendation& r) {
  return {{"node", r.node},     {"K", r.K},         {"R", r.R},
          {"W", r.W},           {"M", r.M},         {"alpha", r.alpha},
          {"beta", r.beta},     {"collaborative", r.collaborative},
          {"step", r.step}};
}

nlohmann::json recommendations_to_json(const std::string& user, const std::string& current,
                                       std::size_t k, const std::vector<Recommendation>& recs,
                                       RelevanceVariant variant) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& r : recs) items.push_back(recommendation_to_json(r));
  return {{"user", user}, {"current", current}, {"k", k}, {"recs", std::move(items)},
          {"variant", to_string(variant)}};
}

}  // namespace intentrec
