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
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "intentrec/ingest.hpp"

namespace intentrec {

struct NodeAttrs {
  bool target = false;
  double mass = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double dwell_seconds = 0.0;
};

struct Edge {
  double weight = 0.0;  // W_uv, row-stochastic over the source node
  std::size_t count = 0;
};

// Per-user Markov navigation graph. Nodes and edges are kept in ordered
// maps so every traversal is deterministic.
class NavGraph {
 public:
  using EdgeMap = std::map<std::string, Edge>;

  NavGraph() = default;
  explicit NavGraph(std::string user_id) : user_id_(std::move(user_id)) {}

  const std::string& user_id() const { return user_id_; }
  const std::map<std::string, NodeAttrs>& nodes() const { return nodes_; }
  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  bool contains(const std::string& id) const { return nodes_.count(id) > 0; }

  // Throws LookupError for unknown ids.
  const NodeAttrs& node(const std::string& id) const;
  NodeAttrs& node(const std::string& id);

  // Outgoing edges of `id`; empty for sinks and unknown ids.
  const EdgeMap& successors(const std::string& id) const;
  std::optional<double> weight(const std::string& from, const std::string& to) const;
  std::size_t edge_count() const;
  std::size_t in_degree(const std::string& id) const;
  std::vector<std::string> targets() const;
  bool has_target() const;

  NodeAttrs& add_node(const std::string& id);
  // Inserts or overwrites an edge; callers are responsible for keeping
  // outgoing weights row-stochastic.
  void set_edge(const std::string& from, const std::string& to, double weight, std::size_t count);

  nlohmann::json to_json() const;
  static NavGraph from_json(const nlohmann::json& j);

 private:
  std::string user_id_;
  std::map<std::string, NodeAttrs> nodes_;
  std::map<std::string, EdgeMap> out_;
};

// Builds the user's graph from within-session transitions. Consecutive
// repeats of one report add dwell time, not a self-loop. A session's final
// hit is credited with the user's median dwell.
NavGraph build_graph(const std::vector<Session>& sessions);

// Flags every node whose distinct in-degree is at least the mean in-degree.
std::set<std::string> detect_targets(NavGraph& graph);

struct IntentDistances {
  std::string source;
  std::map<std::string, double> probability;  // target -> max path probability
};

// Single-source Dijkstra over edge lengths -ln(W). Unreachable targets are
// omitted; a source that is itself a target maps to 1.
IntentDistances intent_distances(const NavGraph& graph, const std::string& source);

}  // namespace intentrec
