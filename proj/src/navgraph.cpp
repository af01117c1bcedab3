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
#include "intentrec/navgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <nlohmann/json.hpp>

#include "intentrec/error.hpp"

namespace intentrec {

const NodeAttrs& NavGraph::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw LookupError("unknown node '" + id + "' in graph of " + user_id_);
  return it->second;
}

NodeAttrs& NavGraph::node(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw LookupError("unknown node '" + id + "' in graph of " + user_id_);
  return it->second;
}

const NavGraph::EdgeMap& NavGraph::successors(const std::string& id) const {
  static const EdgeMap kNone;
  auto it = out_.find(id);
  return it == out_.end() ? kNone : it->second;
}

std::optional<double> NavGraph::weight(const std::string& from, const std::string& to) const {
  const auto& succ = successors(from);
  auto it = succ.find(to);
  if (it == succ.end()) return std::nullopt;
  return it->second.weight;
}

std::size_t NavGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& [from, edges] : out_) n += edges.size();
  return n;
}

std::size_t NavGraph::in_degree(const std::string& id) const {
  std::size_t d = 0;
  for (const auto& [from, edges] : out_) d += edges.count(id);
  return d;
}

std::vector<std::string> NavGraph::targets() const {
  std::vector<std::string> out;
  for (const auto& [id, attrs] : nodes_) {
    if (attrs.target) out.push_back(id);
  }
  return out;
}

bool NavGraph::has_target() const {
  return std::any_of(nodes_.begin(), nodes_.end(), [](const auto& kv) { return kv.second.target; });
}

NodeAttrs& NavGraph::add_node(const std::string& id) { return nodes_[id]; }

void NavGraph::set_edge(const std::string& from, const std::string& to, double weight,
                        std::size_t count) {
  add_node(from);
  add_node(to);
  out_[from][to] = Edge{weight, count};
}

nlohmann::json NavGraph::to_json() const {
  nlohmann::json j;
  j["user_id"] = user_id_;
  j["nodes"] = nlohmann::json::array();
  for (const auto& [id, a] : nodes_) {
    j["nodes"].push_back({{"id", id},
                          {"target", a.target ? 1 : 0},
                          {"mass", a.mass},
                          {"alpha", a.alpha},
                          {"beta", a.beta}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& [from, edges] : out_) {
    for (const auto& [to, e] : edges) {
      j["edges"].push_back({{"from", from}, {"to", to}, {"w", e.weight}, {"count", e.count}});
    }
  }
  return j;
}

NavGraph NavGraph::from_json(const nlohmann::json& j) {
  NavGraph g(j.at("user_id").get<std::string>());
  for (const auto& n : j.at("nodes")) {
    NodeAttrs& a = g.add_node(n.at("id").get<std::string>());
    a.target = n.at("target").get<int>() != 0;
    a.mass = n.at("mass").get<double>();
    a.alpha = n.at("alpha").get<double>();
    a.beta = n.at("beta").get<double>();
  }
  for (const auto& e : j.at("edges")) {
    g.set_edge(e.at("from").get<std::string>(), e.at("to").get<std::string>(),
               e.at("w").get<double>(), e.at("count").get<std::size_t>());
  }
  return g;
}

NavGraph build_graph(const std::vector<Session>& sessions) {
  if (sessions.empty()) return NavGraph();
  const std::string& user = sessions.front().user_id;
  NavGraph g(user);

  std::map<std::string, std::map<std::string, std::size_t>> counts;
  std::vector<double> observed_dwells;
  std::vector<std::string> final_hits;
  for (const auto& s : sessions) {
    if (s.user_id != user) throw ArgumentError("build_graph: sessions span multiple users");
    for (std::size_t i = 0; i < s.hits.size(); ++i) {
      const HitRecord& h = s.hits[i];
      NodeAttrs& attrs = g.add_node(h.report_id);
      if (i + 1 == s.hits.size()) {
        final_hits.push_back(h.report_id);
        continue;
      }
      const HitRecord& next = s.hits[i + 1];
      double dwell = static_cast<double>(next.timestamp - h.timestamp);
      attrs.dwell_seconds += dwell;
      observed_dwells.push_back(dwell);
      if (next.report_id != h.report_id) ++counts[h.report_id][next.report_id];
    }
  }

  double median = 0.0;
  if (!observed_dwells.empty()) {
    std::sort(observed_dwells.begin(), observed_dwells.end());
    std::size_t n = observed_dwells.size();
    median = n % 2 ? observed_dwells[n / 2]
                   : 0.5 * (observed_dwells[n / 2 - 1] + observed_dwells[n / 2]);
  }
  for (const auto& id : final_hits) g.node(id).dwell_seconds += median;

  for (const auto& [from, row] : counts) {
    std::size_t total = 0;
    for (const auto& [to, c] : row) total += c;
    for (const auto& [to, c] : row) {
      g.set_edge(from, to, static_cast<double>(c) / static_cast<double>(total), c);
    }
  }

  double total_dwell = 0.0;
  for (const auto& [id, a] : g.nodes()) total_dwell += a.dwell_seconds;
  const double uniform = 1.0 / static_cast<double>(g.size());
  for (const auto& [id, a] : g.nodes()) {
    g.node(id).mass = total_dwell > 0.0 ? a.dwell_seconds / total_dwell : uniform;
  }
  return g;
}

std::set<std::string> detect_targets(NavGraph& graph) {
  std::set<std::string> targets;
  if (graph.empty()) return targets;
  std::map<std::string, std::size_t> in;
  for (const auto& [id, a] : graph.nodes()) in[id] = 0;
  std::size_t total = 0;
  for (const auto& [id, a] : graph.nodes()) {
    for (const auto& [to, e] : graph.successors(id)) {
      ++in[to];
      ++total;
    }
  }
  // in_degree >= total / n, compared in integers.
  const std::size_t n = graph.size();
  for (const auto& [id, d] : in) {
    bool is_target = d * n >= total;
    graph.node(id).target = is_target;
    if (is_target) targets.insert(id);
  }
  return targets;
}

IntentDistances intent_distances(const NavGraph& graph, const std::string& source) {
  if (!graph.contains(source)) {
    throw LookupError("intent_distances: unknown source '" + source + "'");
  }
  IntentDistances result{source, {}};
  std::map<std::string, double> dist;
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  dist[source] = 0.0;
  frontier.emplace(0.0, source);
  std::set<std::string> settled;
  while (!frontier.empty()) {
    auto [d, u] = frontier.top();
    frontier.pop();
    if (!settled.insert(u).second) continue;
    if (graph.node(u).target) result.probability[u] = std::exp(-d);
    for (const auto& [v, e] : graph.successors(u)) {
      double nd = d - std::log(e.weight);
      auto it = dist.find(v);
      if (it == dist.end() || nd < it->second) {
        dist[v] = nd;
        frontier.emplace(nd, v);
      }
    }
  }
  return result;
}

}  // namespace intentrec
