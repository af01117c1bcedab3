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

// Independent reference implementations and fixtures shared by the unit
// tests and the acceptance binary.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "intentrec/ingest.hpp"
#include "intentrec/navgraph.hpp"
#include "intentrec/ranksvm.hpp"

namespace intentrec::testing {

inline HitRecord make_hit(const std::string& user, Timestamp ts, const std::string& report,
                          std::vector<double> values = {1.0}, const std::string& metric = "m",
                          const std::string& element = "e",
                          ReportKind kind = ReportKind::kTimeSeries) {
  HitRecord h;
  h.user_id = user;
  h.timestamp = ts;
  h.report_id = report;
  h.kind = kind;
  h.metric = metric;
  h.dimension_element = element;
  h.values = std::move(values);
  return h;
}

// One session visiting `reports` with 10 s between views.
inline Session make_session(const std::string& user, const std::vector<std::string>& reports,
                            Timestamp start = 0, Timestamp step = 10) {
  Session s;
  s.user_id = user;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    s.hits.push_back(make_hit(user, start + step * static_cast<Timestamp>(i), reports[i]));
  }
  return s;
}

// Random session set over `n_nodes` reports for one user.
inline std::vector<Session> random_sessions(std::mt19937_64& rng, int n_nodes, int n_sessions,
                                            int max_len, const std::string& user = "u") {
  std::uniform_int_distribution<int> node(0, n_nodes - 1), len(1, max_len), gap(1, 120);
  std::vector<Session> out;
  Timestamp t = 0;
  for (int s = 0; s < n_sessions; ++s) {
    Session session;
    session.user_id = user;
    const int L = len(rng);
    for (int i = 0; i < L; ++i) {
      t += gap(rng);
      session.hits.push_back(make_hit(user, t, "r" + std::to_string(node(rng))));
    }
    t += 10000;
    out.push_back(std::move(session));
  }
  return out;
}

// Random row-stochastic graph with up to `max_nodes` nodes and random targets.
inline NavGraph random_graph(std::mt19937_64& rng, int max_nodes) {
  std::uniform_int_distribution<int> size(1, max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = size(rng);
  NavGraph g("g");
  for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> out;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i != j && unit(rng) < 0.45) {
        const double w = 0.05 + unit(rng);
        out.emplace_back(j, w);
        total += w;
      }
    }
    for (const auto& [j, w] : out) {
      g.set_edge("n" + std::to_string(i), "n" + std::to_string(j), w / total, 1);
    }
  }
  bool any = false;
  for (int i = 0; i < n; ++i) {
    const bool t = unit(rng) < 0.4;
    g.node("n" + std::to_string(i)).target = t;
    any = any || t;
  }
  if (!any) g.node("n" + std::to_string(n - 1)).target = true;
  return g;
}

// Maximum path probability from `source` to every reachable target, by
// enumerating every simple path.
inline std::map<std::string, double> brute_force_distances(const NavGraph& g,
                                                           const std::string& source) {
  std::map<std::string, double> best;
  std::set<std::string> on_path{source};
  std::function<void(const std::string&, double)> walk = [&](const std::string& at, double p) {
    if (g.node(at).target) best[at] = std::max(best[at], p);
    for (const auto& [next, e] : g.successors(at)) {
      if (on_path.count(next)) continue;
      on_path.insert(next);
      walk(next, p * e.weight);
      on_path.erase(next);
    }
  };
  walk(source, 1.0);
  return best;
}

// Slices X_u = G_u H diag(S_u) V^T with well-conditioned random factors.
struct Parafac2Oracle {
  std::vector<Eigen::MatrixXd> slices;
  std::vector<Eigen::MatrixXd> G;
  Eigen::MatrixXd H;
  std::vector<Eigen::VectorXd> S;
  Eigen::MatrixXd V;
};

inline double condition_number(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

inline Parafac2Oracle make_parafac2_oracle(std::uint64_t seed, int rank, int users = 30,
                                           int columns = 30, int base_rows = 10) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto gaussian = [&](int r, int c) {
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
    }
    return M;
  };
  Parafac2Oracle o;
  o.H = gaussian(rank, rank);
  while (condition_number(o.H) > 10.0) o.H = gaussian(rank, rank);
  o.V = gaussian(columns, rank);
  for (int u = 0; u < users; ++u) {
    const int rows = base_rows + 2 * u;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rows, rank));
    Eigen::MatrixXd G = qr.householderQ() * Eigen::MatrixXd::Identity(rows, rank);
    Eigen::VectorXd s(rank);
    for (int j = 0; j < rank; ++j) s(j) = 0.2 + unit(rng);
    o.slices.push_back(G * o.H * s.asDiagonal() * o.V.transpose());
    o.G.push_back(std::move(G));
    o.S.push_back(std::move(s));
  }
  return o;
}

inline bool non_increasing(const std::vector<double>& errors, double slack = 1e-9) {
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i] > errors[i - 1] * (1.0 + slack) + 1e-300) return false;
  }
  return true;
}

// Textbook one-dimensional Kalman filter.
struct ScalarFilterStep {
  double f_prior, p_prior, gain, f_post, p_post;
};

inline std::vector<ScalarFilterStep> scalar_filter(double a, double q, double lambda, double psi,
                                                   double f0, double p0,
                                                   const std::vector<double>& xs) {
  std::vector<ScalarFilterStep> out;
  double f = f0, p = p0;
  for (double x : xs) {
    ScalarFilterStep s;
    s.f_prior = a * f;
    s.p_prior = a * p * a + q;
    s.gain = s.p_prior * lambda / (lambda * s.p_prior * lambda + psi);
    s.f_post = s.f_prior + s.gain * (x - lambda * s.f_prior);
    s.p_post = (1.0 - s.gain * lambda) * s.p_prior;
    f = s.f_post;
    p = s.p_post;
    out.push_back(s);
  }
  return out;
}

// Unit vectors on either side of a random hyperplane, at least `margin`
// away from it.
inline RankTrainingSet planted_margin_set(std::mt19937_64& rng, int dim, int per_side,
                                          double margin) {
  std::normal_distribution<double> gauss;
  Eigen::VectorXd w(dim);
  for (int i = 0; i < dim; ++i) w(i) = gauss(rng);
  w.normalize();
  RankTrainingSet ts;
  ts.intent = "I";
  while (static_cast<int>(ts.positives.size()) < per_side ||
         static_cast<int>(ts.negatives.size()) < per_side) {
    Eigen::VectorXd f(dim);
    for (int i = 0; i < dim; ++i) f(i) = gauss(rng);
    f.normalize();
    const double m = w.dot(f);
    if (m >= margin && static_cast<int>(ts.positives.size()) < per_side) ts.positives.push_back(f);
    if (m <= -margin && static_cast<int>(ts.negatives.size()) < per_side) ts.negatives.push_back(f);
  }
  return ts;
}

// Pairwise AUC of one event computed by direct pair counting.
inline double pair_count_auc(double positive, const std::vector<double>& negatives) {
  if (negatives.empty()) return 1.0;
  double wins = 0.0;
  for (double n : negatives) wins += positive > n ? 1.0 : positive == n ? 0.5 : 0.0;
  return wins / static_cast<double>(negatives.size());
}

}  // namespace intentrec::testing
