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

#include "intentrec/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include <spdlog/spdlog.h>

#include "intentrec/error.hpp"

namespace intentrec {

double ndcg_at_k(const std::vector<std::string>& shown, const std::string& truth, std::size_t k) {
  if (k < 1) throw ArgumentError("ndcg_at_k: k must be >= 1");
  const std::size_t n = std::min(k, shown.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (shown[i] == truth) return 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return 0.0;
}

std::pair<double, double> precision_recall_at_k(const std::vector<std::string>& shown,
                                                const std::string& truth, std::size_t k) {
  if (k < 1) throw ArgumentError("precision_recall_at_k: k must be >= 1");
  const std::size_t n = std::min(k, shown.size());
  const bool hit = std::find(shown.begin(), shown.begin() + static_cast<long>(n), truth) !=
                   shown.begin() + static_cast<long>(n);
  const double hits = hit ? 1.0 : 0.0;
  return {hits / static_cast<double>(k), hits};
}

double event_auc(const AucEvent& event) {
  if (!event.positive) return 0.0;
  if (event.negatives.empty()) return 1.0;
  double wins = 0.0;
  for (double s : event.negatives) {
    if (s < *event.positive) {
      wins += 1.0;
    } else if (s == *event.positive) {
      wins += 0.5;
    }
  }
  return wins / static_cast<double>(event.negatives.size());
}

double weighted_auc(const std::vector<AucEvent>& events) {
  std::map<std::string, std::pair<double, std::size_t>> per_user;
  for (const auto& e : events) {
    auto& [sum, n] = per_user[e.user];
    sum += event_auc(e);
    ++n;
  }
  double num = 0.0, den = 0.0;
  for (const auto& [user, acc] : per_user) {
    const double n = static_cast<double>(acc.second);
    num += n * (acc.first / n);
    den += n;
  }
  return den > 0.0 ? num / den : 0.0;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::kMass,     Method::kFrequency,
                                              Method::kContext,  Method::kParafac2,
                                              Method::kMaxIxD,   Method::kDotIxD,
                                              Method::kMaxI,     Method::kSumI};
  return methods;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kMass: return "Mass";
    case Method::kFrequency: return "Frequency";
    case Method::kContext: return "Context";
    case Method::kParafac2: return "PARAFAC2";
    case Method::kMaxIxD: return "Max-IxD";
    case Method::kDotIxD: return "Dot-IxD";
    case Method::kMaxI: return "Max-I";
    case Method::kSumI: return "Sum-I";
  }
  return "";
}

Method method_from_string(const std::string& s) {
  auto norm = [](const std::string& x) {
    std::string out;
    for (char c : x) {
      if (c != '-' && c != '_') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
  };
  for (Method m : all_methods()) {
    if (norm(to_string(m)) == norm(s)) return m;
  }
  throw ArgumentError("unknown method: " + s);
}

namespace {

bool uses_full_score(Method m) {
  return m == Method::kParafac2 || m == Method::kMaxIxD || m == Method::kDotIxD ||
         m == Method::kMaxI || m == Method::kSumI;
}

RelevanceVariant variant_of(Method m) {
  switch (m) {
    case Method::kMaxIxD: return RelevanceVariant::kMaxIxD;
    case Method::kDotIxD: return RelevanceVariant::kDotIxD;
    case Method::kMaxI: return RelevanceVariant::kMaxI;
    default: return RelevanceVariant::kSumI;
  }
}

std::vector<Recommendation> baseline(const NavGraph& graph, const std::string& current,
                                     Method m) {
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
    r.K = m == Method::kMass ? r.M : r.W;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<Recommendation> method_candidates(const TrainedSystem& sys, const std::string& user,
                                              const std::string& current, Method method,
                                              const ViewFactors* factors, bool group) {
  const NavGraph* graph = sys.graph(user);
  if (!graph) throw LookupError("no graph for user " + user);
  if (method == Method::kMass || method == Method::kFrequency) {
    return baseline(*graph, current, method);
  }
  const UserModel* model = sys.user(user);
  const RankModel* rank = nullptr;
  if (model && model->factorized && factors) {
    rank = method == Method::kParafac2 ? &model->plain_rank : &model->rank;
  }
  if (!rank || rank->intents.empty()) return baseline(*graph, current, Method::kFrequency);

  const Eigen::VectorXd& f = method == Method::kParafac2 ? factors->projected : factors->evolved;
  const auto scores = rank->intent_scores(f);
  const RelevanceVariant variant = variant_of(method);
  const DistanceTable* table = nullptr;
  if (auto it = sys.graphs.distances.find(user); it != sys.graphs.distances.end()) {
    table = &it->second;
  }
  auto recs = score_candidates(*graph, current, scores, variant, table);
  if (method == Method::kContext) {
    for (auto& r : recs) r.K = r.R;
    return recs;
  }
  if (group && uses_full_score(method) && model->cluster == 0) {
    auto extra = group_recommend(user, sys.clustering, sys.graphs, current, scores, variant);
    recs.insert(recs.end(), extra.begin(), extra.end());
  }
  return recs;
}

BenchmarkResult run_benchmark(const TrainedSystem& sys, const std::vector<Session>& test,
                              const BenchmarkOptions& options) {
  if (options.k < 1) throw ArgumentError("run_benchmark: k must be >= 1");
  BenchmarkResult result;
  const std::size_t M = options.methods.size();
  std::vector<double> ndcg(M, 0.0), precision(M, 0.0), recall(M, 0.0);
  std::vector<std::vector<AucEvent>> auc(M);
  std::size_t events = 0;

  for (const auto& [user, sessions] : by_user(test)) {
    const NavGraph* graph = sys.graph(user);
    const UserModel* model = sys.user(user);
    if (!graph || !model) {
      for (const auto& s : sessions) {
        for (std::size_t t = 0; t + 1 < s.hits.size(); ++t) {
          result.skipped_unseen += s.hits[t].report_id != s.hits[t + 1].report_id;
        }
      }
      continue;
    }
    if (graph->size() < options.min_unique_reports) {
      ++result.filtered_users;
      continue;
    }
    KalmanState state = model->state;
    bool contributed = false;
    for (const auto& s : sessions) {
      for (std::size_t t = 0; t < s.hits.size(); ++t) {
        const HitRecord& hit = s.hits[t];
        ViewFactors vf;
        if (model->factorized) vf = observe(*model, state, hit);
        if (t + 1 >= s.hits.size()) continue;
        const std::string& truth = s.hits[t + 1].report_id;
        if (truth == hit.report_id) continue;
        if (!graph->contains(hit.report_id)) {
          ++result.skipped_unseen;
          continue;
        }
        ++events;
        contributed = true;
        for (std::size_t mi = 0; mi < M; ++mi) {
          auto recs = method_candidates(sys, user, hit.report_id, options.methods[mi],
                                        model->factorized ? &vf : nullptr,
                                        options.group_recommendations);
          AucEvent ae;
          ae.user = user;
          for (const auto& r : recs) {
            if (r.node == truth) {
              ae.positive = r.K;
            } else {
              ae.negatives.push_back(r.K);
            }
          }
          auc[mi].push_back(std::move(ae));
          std::vector<std::string> shown;
          for (const auto& r : rank(std::move(recs), options.k)) shown.push_back(r.node);
          ndcg[mi] += ndcg_at_k(shown, truth, options.k);
          const auto [p, rc] = precision_recall_at_k(shown, truth, options.k);
          precision[mi] += p;
          recall[mi] += rc;
        }
      }
    }
    result.users += contributed;
  }

  if (events == 0) {
    spdlog::warn("run_benchmark: no evaluation events");
    return result;
  }
  const double n = static_cast<double>(events);
  for (std::size_t mi = 0; mi < M; ++mi) {
    EvalReport r;
    r.method = to_string(options.methods[mi]);
    r.ndcg = ndcg[mi] / n;
    r.precision = precision[mi] / n;
    r.recall = recall[mi] / n;
    r.wauc = weighted_auc(auc[mi]);
    r.events = events;
    result.reports.push_back(r);
  }
  return result;
}

void write_results_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "method,ndcg,precision,recall,wauc,events\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%zu\n", r.method.c_str(), r.ndcg,
                  r.precision, r.recall, r.wauc, r.events);
    out << buf;
  }
}

std::string format_table(const std::vector<EvalReport>& reports) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %8s %10s %8s %8s %8s\n", "Method", "NDCG", "Precision",
                "Recall", "w-AUC", "Events");
  out += buf;
  out += std::string(59, '-') + "\n";
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%-12s %8.4f %10.4f %8.4f %8.4f %8zu\n", r.method.c_str(),
                  r.ndcg, r.precision, r.recall, r.wauc, r.events);
    out += buf;
  }
  return out;
}

}  // namespace intentrec
