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

#include "intentrec/system.hpp"

#include <algorithm>
#include <numeric>

#include <spdlog/spdlog.h>

#include "intentrec/error.hpp"
#include "intentrec/hash.hpp"

namespace intentrec {

const UserModel* TrainedSystem::user(const std::string& id) const {
  auto it = users.find(id);
  return it == users.end() ? nullptr : &it->second;
}

const NavGraph* TrainedSystem::graph(const std::string& id) const {
  auto it = graphs.graphs.find(id);
  return it == graphs.graphs.end() ? nullptr : &it->second;
}

std::map<std::string, std::vector<Session>> by_user(const std::vector<Session>& sessions) {
  std::map<std::string, std::vector<Session>> out;
  for (const auto& s : sessions) {
    if (!s.hits.empty()) out[s.user_id].push_back(s);
  }
  for (auto& [user, list] : out) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Session& a, const Session& b) { return a.start() < b.start(); });
  }
  return out;
}

std::vector<std::vector<std::size_t>> column_index(const std::vector<Session>& sessions) {
  // Same ordering as build_matrix: concatenate, then stable sort by time.
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    for (std::size_t h = 0; h < sessions[s].hits.size(); ++h) order.emplace_back(s, h);
  }
  std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    return sessions[a.first].hits[a.second].timestamp < sessions[b.first].hits[b.second].timestamp;
  });
  std::vector<std::vector<std::size_t>> index(sessions.size());
  for (std::size_t s = 0; s < sessions.size(); ++s) index[s].resize(sessions[s].hits.size());
  for (std::size_t c = 0; c < order.size(); ++c) index[order[c].first][order[c].second] = c;
  return index;
}

std::map<std::string, NavGraph> build_graphs(
    const std::map<std::string, std::vector<Session>>& users) {
  std::map<std::string, NavGraph> graphs;
  for (const auto& [user, sessions] : users) {
    NavGraph g = build_graph(sessions);
    detect_targets(g);
    graphs.emplace(user, std::move(g));
  }
  return graphs;
}

std::vector<LabeledSession> label_sessions(const std::vector<Session>& sessions,
                                           const NavGraph& graph, const Eigen::MatrixXd& factors) {
  const auto index = column_index(sessions);
  std::vector<LabeledSession> out;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    LabeledSession ls;
    ls.target = final_target(sessions[s], graph);
    for (std::size_t c : index[s]) {
      if (static_cast<Eigen::Index>(c) >= factors.rows()) {
        throw ArgumentError("label_sessions: factor rows do not cover every view");
      }
      ls.factors.emplace_back(factors.row(static_cast<Eigen::Index>(c)).transpose());
    }
    out.push_back(std::move(ls));
  }
  return out;
}

void fit_graphs(TrainedSystem& sys, const UserSessions& users) {
  if (users.empty()) throw DataError("fit_graphs: no training sessions");
  sys.graphs.graphs = build_graphs(users);
  sys.graphs.distances.clear();
  for (const auto& [user, g] : sys.graphs.graphs) {
    sys.graphs.distances.emplace(user, all_intent_distances(g));
  }
  std::vector<UsageFeatures> usage;
  for (const auto& [user, sessions] : users) usage.push_back(usage_features(sessions));
  sys.clustering = cluster_users(usage, sys.options.seed);
}

std::map<std::string, ContextMatrix> fit_context(TrainedSystem& sys, const UserSessions& users) {
  std::map<std::string, ContextMatrix> matrices;
  sys.users.clear();
  for (const auto& [user, sessions] : users) {
    ContextMatrix m = build_matrix(sessions);
    UserModel model;
    model.user_id = user;
    model.cluster = sys.clustering.cluster_of(user);
    model.layout = m.layout;
    sys.users.emplace(user, std::move(model));
    matrices.emplace(user, std::move(m));
  }
  return matrices;
}

std::vector<TensorPlan> plan_tensors(const TrainedSystem& sys,
                                     const std::map<std::string, ContextMatrix>& matrices) {
  const int rank = sys.options.parafac2.rank;
  std::vector<TensorPlan> plans;
  for (int c = 0; c < kExperienceGroups; ++c) {
    TensorPlan plan;
    plan.cluster = c;
    for (const auto& [user, m] : matrices) {
      if (sys.clustering.cluster_of(user) != c) continue;
      if (m.X.rows() < rank) {
        spdlog::warn("user {}: {} context rows < rank {}; frequency-only scoring", user,
                     m.X.rows(), rank);
        continue;
      }
      plan.users.push_back(user);
      plan.columns = std::max(plan.columns, static_cast<std::size_t>(m.X.cols()));
    }
    if (plan.users.empty()) continue;
    if (static_cast<std::size_t>(rank) > plan.columns) {
      spdlog::warn("cluster {}: {} columns < rank {}; frequency-only scoring", c, plan.columns,
                   rank);
      continue;
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

namespace {

std::vector<ContextMatrix> members(const std::map<std::string, ContextMatrix>& matrices,
                                   const TensorPlan& plan) {
  std::vector<ContextMatrix> out;
  for (const auto& user : plan.users) {
    auto it = matrices.find(user);
    if (it == matrices.end()) throw LookupError("no context matrix for user " + user);
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

std::vector<ClusterFit> fit_factors(const TrainedSystem& sys,
                                    const std::map<std::string, ContextMatrix>& matrices,
                                    const std::vector<TensorPlan>& plans) {
  std::vector<ClusterFit> fits;
  for (const auto& plan : plans) {
    const ContextTensor tensor = assemble_tensor(members(matrices, plan), sys.clustering, plan.cluster);
    ClusterFit fit;
    fit.plan = plan;
    fit.seed = sys.options.seed * 1000003ULL + static_cast<std::uint64_t>(plan.cluster);
    Parafac2Options p2 = sys.options.parafac2;
    p2.seed = fit.seed;
    fit.result = decompose(tensor, p2);
    fits.push_back(std::move(fit));
  }
  return fits;
}

void fit_filters(TrainedSystem& sys, const std::map<std::string, ContextMatrix>& matrices,
                 const std::vector<ClusterFit>& fits) {
  for (const auto& fit : fits) {
    const auto& factors = fit.result.factors;
    if (factors.users() != fit.plan.users.size()) {
      throw DataError("fit_filters: factor count does not match cluster members");
    }
    const Eigen::MatrixXd F = factors.initial_latent_factors();
    for (std::size_t i = 0; i < fit.plan.users.size(); ++i) {
      const std::string& id = fit.plan.users[i];
      UserModel& model = sys.users.at(id);
      const ContextMatrix& m = matrices.at(id);
      model.loading = factors.loading_matrix(i);
      if (model.loading.rows() != m.X.rows()) {
        throw DataError("fit_filters: loading rows do not match context rows for user " + id);
      }
      model.projector = model.loading.completeOrthogonalDecomposition().pseudoInverse();
      model.kalman = make_model(pad_cyclic(m.X, static_cast<std::size_t>(F.cols())), model.loading,
                                F, sys.options.process_noise, sys.options.transition_ridge);
      const auto evolved = evolve_sequence(model.kalman, F.col(0), m.X, &model.state);
      model.fhat.resize(static_cast<Eigen::Index>(evolved.size()), factors.rank);
      for (std::size_t t = 0; t < evolved.size(); ++t) {
        model.fhat.row(static_cast<Eigen::Index>(t)) = evolved[t].transpose();
      }
      model.factorized = true;
    }
  }
}

void fit_rank_models(TrainedSystem& sys, const UserSessions& users,
                     const std::map<std::string, ContextMatrix>& matrices) {
  for (auto& [id, model] : sys.users) {
    if (!model.factorized) continue;
    const auto& sessions = users.at(id);
    const NavGraph& graph = sys.graphs.graphs.at(id);
    const Eigen::MatrixXd projected = (model.projector * matrices.at(id).X).transpose();
    RankOptions ro = sys.options.rank;
    ro.seed = sys.options.seed * 7919ULL + fnv1a64(id);
    model.rank = train_rank_model(label_sessions(sessions, graph, model.fhat), ro);
    model.plain_rank = train_rank_model(label_sessions(sessions, graph, projected), ro);
  }
}

TrainedSystem train_system(const std::vector<Session>& train, const SystemOptions& options) {
  const auto users = by_user(train);
  if (users.empty()) throw DataError("train_system: no training sessions");
  TrainedSystem sys;
  sys.options = options;
  fit_graphs(sys, users);
  const auto matrices = fit_context(sys, users);
  const auto fits = fit_factors(sys, matrices, plan_tensors(sys, matrices));
  fit_filters(sys, matrices, fits);
  fit_rank_models(sys, users, matrices);
  return sys;
}

ViewFactors observe(const UserModel& model, KalmanState& state, const HitRecord& hit) {
  if (!model.factorized) throw ArgumentError("observe: user " + model.user_id + " has no factors");
  ViewFactors out;
  out.observed = model.layout.slot_of({hit.metric, hit.dimension_element}) >= 0;
  predict(model.kalman, state);
  if (out.observed) {
    const Eigen::VectorXd x = context_vector(model.layout, hit);
    update(model.kalman, state, x);
    out.projected = model.projector * x;
  } else {
    update(model.kalman, state, std::nullopt);
    out.projected = Eigen::VectorXd::Zero(model.loading.cols());
  }
  out.evolved = state.f_post;
  return out;
}

}  // namespace intentrec
