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
#include "intentrec/context.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "intentrec/error.hpp"

namespace intentrec {

FeatureVector extract_features(const HitRecord& hit) {
  const auto& v = hit.values;
  if (v.empty()) throw ArgumentError("extract_features: empty values for report " + hit.report_id);
  FeatureVector f{};
  f[0] = std::accumulate(v.begin(), v.end(), 0.0);
  if (hit.kind == ReportKind::kHistogram) return f;

  auto max_it = std::max_element(v.begin(), v.end());
  f[1] = *max_it;
  f[2] = *std::min_element(v.begin(), v.end());
  f[3] = static_cast<double>(std::distance(v.begin(), max_it));
  std::size_t run = 0, longest = 0;
  double abs_change = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    double d = v[i] - v[i - 1];
    abs_change += std::abs(d);
    run = d > 0 ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  f[4] = static_cast<double>(longest);
  f[5] = v.size() > 1 ? abs_change / static_cast<double>(v.size() - 1) : 0.0;
  return f;
}

long FeatureLayout::slot_of(const MetricElement& pair) const {
  auto it = std::lower_bound(slots.begin(), slots.end(), pair);
  if (it == slots.end() || *it != pair) return -1;
  return static_cast<long>(std::distance(slots.begin(), it));
}

nlohmann::json FeatureLayout::to_json() const {
  nlohmann::json j;
  j["user_id"] = user_id;
  j["slots"] = nlohmann::json::array();
  for (const auto& [m, e] : slots) j["slots"].push_back({m, e});
  return j;
}

FeatureLayout FeatureLayout::from_json(const nlohmann::json& j) {
  FeatureLayout layout;
  layout.user_id = j.at("user_id").get<std::string>();
  for (const auto& s : j.at("slots")) {
    layout.slots.emplace_back(s.at(0).get<std::string>(), s.at(1).get<std::string>());
    ++layout.elements_per_metric[layout.slots.back().first];
  }
  if (!std::is_sorted(layout.slots.begin(), layout.slots.end())) {
    throw DataError("layout slots for " + layout.user_id + " are not sorted");
  }
  return layout;
}

FeatureLayout build_layout(const std::string& user_id, const std::vector<Session>& sessions) {
  std::set<MetricElement> pairs;
  for (const auto& s : sessions) {
    for (const auto& h : s.hits) pairs.emplace(h.metric, h.dimension_element);
  }
  FeatureLayout layout;
  layout.user_id = user_id;
  layout.slots.assign(pairs.begin(), pairs.end());
  for (const auto& [m, e] : layout.slots) ++layout.elements_per_metric[m];
  return layout;
}

Eigen::VectorXd context_vector(const FeatureLayout& layout, const HitRecord& hit) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.rows()));
  long slot = layout.slot_of({hit.metric, hit.dimension_element});
  if (slot < 0) return x;
  FeatureVector f = extract_features(hit);
  for (std::size_t k = 0; k < kFeaturesPerSlot; ++k) {
    x(static_cast<Eigen::Index>(slot * kFeaturesPerSlot + k)) = f[k];
  }
  return x;
}

ContextMatrix build_matrix(const std::vector<Session>& sessions) {
  std::vector<const HitRecord*> hits;
  for (const auto& s : sessions) {
    for (const auto& h : s.hits) hits.push_back(&h);
  }
  if (hits.empty()) throw ArgumentError("build_matrix: user has no hits");
  std::stable_sort(hits.begin(), hits.end(), [](const HitRecord* a, const HitRecord* b) {
    return a->timestamp < b->timestamp;
  });

  ContextMatrix cm;
  cm.user_id = hits.front()->user_id;
  cm.layout = build_layout(cm.user_id, sessions);
  cm.X.resize(static_cast<Eigen::Index>(cm.layout.rows()), static_cast<Eigen::Index>(hits.size()));
  for (std::size_t t = 0; t < hits.size(); ++t) {
    cm.X.col(static_cast<Eigen::Index>(t)) = context_vector(cm.layout, *hits[t]);
  }
  return cm;
}

UsageFeatures usage_features(const std::vector<Session>& sessions) {
  UsageFeatures u;
  std::set<std::string> reports;
  for (const auto& s : sessions) {
    if (u.user_id.empty()) u.user_id = s.user_id;
    u.browsing_seconds += static_cast<double>(s.end() - s.start());
    u.transitions += static_cast<double>(s.hits.size() - 1);
    for (const auto& h : s.hits) reports.insert(h.report_id);
  }
  u.distinct_reports = static_cast<double>(reports.size());
  return u;
}

int UserClustering::cluster_of(const std::string& user) const {
  auto it = assignments.find(user);
  if (it == assignments.end()) throw LookupError("no cluster assignment for user " + user);
  return it->second;
}

std::vector<std::string> UserClustering::members(int cluster) const {
  std::vector<std::string> out;
  for (const auto& [user, c] : assignments) {
    if (c == cluster) out.push_back(user);
  }
  return out;
}

nlohmann::json UserClustering::to_json() const {
  nlohmann::json j;
  j["assignments"] = assignments;
  j["insufficient"] = insufficient;
  j["empty"] = empty;
  j["centroids"] = nlohmann::json::array();
  for (const auto& c : centroids) j["centroids"].push_back({c(0), c(1), c(2)});
  j["objective_trace"] = objective_trace;
  return j;
}

UserClustering UserClustering::from_json(const nlohmann::json& j) {
  UserClustering c;
  c.assignments = j.at("assignments").get<std::map<std::string, int>>();
  c.insufficient = j.at("insufficient").get<bool>();
  c.empty = j.at("empty").get<std::vector<bool>>();
  for (const auto& p : j.at("centroids")) {
    c.centroids.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  }
  c.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  return c;
}

namespace {

std::size_t nearest(const Eigen::Vector3d& p, const std::vector<Eigen::Vector3d>& centers,
                    const std::vector<bool>& active, double* dist2 = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    if (!active[c]) continue;
    double d = (p - centers[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

}  // namespace

UserClustering cluster_users(const std::vector<UsageFeatures>& users, std::uint64_t seed,
                             int max_iters, double shift_tol) {
  UserClustering result;
  result.centroids.assign(kExperienceGroups, Eigen::Vector3d::Zero());
  result.empty.assign(kExperienceGroups, true);
  if (users.size() < static_cast<std::size_t>(kExperienceGroups)) {
    result.insufficient = true;
    for (const auto& u : users) result.assignments[u.user_id] = 0;
    if (!users.empty()) result.empty[0] = false;
    return result;
  }

  // Sorted by user id so the outcome does not depend on input order.
  std::vector<UsageFeatures> sorted = users;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
  const std::size_t n = sorted.size();
  std::vector<Eigen::Vector3d> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {sorted[i].browsing_seconds, sorted[i].transitions, sorted[i].distinct_reports};
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(n);
  Eigen::Vector3d sd = Eigen::Vector3d::Zero();
  for (const auto& p : pts) sd += (p - mean).cwiseAbs2();
  sd = (sd / static_cast<double>(n)).cwiseSqrt();
  for (auto& p : pts) {
    for (int d = 0; d < 3; ++d) p(d) = sd(d) > 0 ? (p(d) - mean(d)) / sd(d) : 0.0;
  }

  // k-means++ seeding. Once every point coincides with a chosen center the
  // remaining centers stay inactive and their clusters empty.
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Vector3d> centers(kExperienceGroups, Eigen::Vector3d::Zero());
  std::vector<bool> active(kExperienceGroups, false);
  centers[0] = pts[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
  active[0] = true;
  for (int c = 1; c < kExperienceGroups; ++c) {
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) nearest(pts[i], centers, active, &d2[i]);
    double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total <= 0.0) break;
    double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      if (r < d2[i]) {
        pick = i;
        break;
      }
      r -= d2[i];
    }
    centers[c] = pts[pick];
    active[c] = true;
  }

  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d2 = 0.0;
      assign[i] = nearest(pts[i], centers, active, &d2);
      wcss += d2;
    }
    result.objective_trace.push_back(wcss);
    std::vector<Eigen::Vector3d> sums(kExperienceGroups, Eigen::Vector3d::Zero());
    std::vector<std::size_t> counts(kExperienceGroups, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[assign[i]] += pts[i];
      ++counts[assign[i]];
    }
    double shift = 0.0;
    for (int c = 0; c < kExperienceGroups; ++c) {
      if (counts[c] == 0) continue;
      Eigen::Vector3d next = sums[c] / static_cast<double>(counts[c]);
      shift = std::max(shift, (next - centers[c]).norm());
      centers[c] = next;
    }
    if (shift < shift_tol) break;
  }
  // Final assignment against the converged centers.
  std::vector<std::size_t> counts(kExperienceGroups, 0);
  double wcss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    assign[i] = nearest(pts[i], centers, active, &d2);
    wcss += d2;
    ++counts[assign[i]];
  }
  result.objective_trace.push_back(wcss);

  // Relabel by total activity so cluster 3 is the most experienced group;
  // empty clusters take the lowest labels.
  std::vector<int> order(kExperienceGroups);
  std::iota(order.begin(), order.end(), 0);
  auto activity = [&](int c) {
    return counts[c] == 0 ? -std::numeric_limits<double>::infinity() : centers[c].sum();
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return activity(a) < activity(b); });
  std::vector<int> label(kExperienceGroups);
  for (int rank = 0; rank < kExperienceGroups; ++rank) label[order[rank]] = rank;
  for (int c = 0; c < kExperienceGroups; ++c) {
    result.centroids[label[c]] = centers[c];
    result.empty[label[c]] = counts[c] == 0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.assignments[sorted[i].user_id] = label[assign[i]];
  }
  return result;
}

Eigen::MatrixXd pad_cyclic(const Eigen::MatrixXd& X, std::size_t columns) {
  const auto have = static_cast<std::size_t>(X.cols());
  if (have == 0) throw ArgumentError("pad_cyclic: matrix has no columns");
  if (columns < have) throw ArgumentError("pad_cyclic: target shorter than matrix");
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(columns));
  for (std::size_t t = 0; t < columns; ++t) {
    out.col(static_cast<Eigen::Index>(t)) = X.col(static_cast<Eigen::Index>(t % have));
  }
  return out;
}

ContextTensor assemble_tensor(const std::vector<ContextMatrix>& matrices,
                              const UserClustering& clustering, int cluster_id) {
  std::vector<const ContextMatrix*> members;
  for (const auto& m : matrices) {
    auto it = clustering.assignments.find(m.user_id);
    if (it != clustering.assignments.end() && it->second == cluster_id) members.push_back(&m);
  }
  if (members.empty()) {
    throw DataError("cluster " + std::to_string(cluster_id) + " has no members; tensor is empty");
  }
  std::sort(members.begin(), members.end(),
            [](const ContextMatrix* a, const ContextMatrix* b) { return a->user_id < b->user_id; });

  ContextTensor tensor;
  tensor.cluster_id = cluster_id;
  for (const auto* m : members) {
    tensor.columns = std::max(tensor.columns, static_cast<std::size_t>(m->X.cols()));
  }
  for (const auto* m : members) {
    tensor.users.push_back(m->user_id);
    tensor.original_columns.push_back(static_cast<std::size_t>(m->X.cols()));
    tensor.slices.push_back(pad_cyclic(m->X, tensor.columns));
  }
  return tensor;
}

}  // namespace intentrec
