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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "intentrec/context.hpp"
#include "intentrec/ingest.hpp"
#include "intentrec/kalman.hpp"
#include "intentrec/navgraph.hpp"
#include "intentrec/parafac2.hpp"
#include "intentrec/ranksvm.hpp"
#include "intentrec/recommender.hpp"

namespace intentrec {

struct SystemOptions {
  Parafac2Options parafac2;
  double process_noise = kDefaultProcessNoise;
  double transition_ridge = 1e-6;
  RankOptions rank;
  std::uint64_t seed = 1;  // clustering, decomposition and rank training derive from it
};

// Everything learned for one user from the training sessions.
struct UserModel {
  std::string user_id;
  int cluster = 0;
  FeatureLayout layout;
  bool factorized = false;  // false: too few context rows, frequency-only scoring
  Eigen::MatrixXd loading;    // Lambda_u, N_u x R
  Eigen::MatrixXd projector;  // least-squares inverse of Lambda_u, R x N_u
  KalmanModel kalman;
  KalmanState state;          // after the last training view
  Eigen::MatrixXd fhat;       // T_u x R evolved factors, one row per training view
  RankModel rank;             // trained on evolved factors
  RankModel plain_rank;       // trained on projected, unfiltered factors
};

struct TrainedSystem {
  SystemOptions options;
  UserClustering clustering;
  GraphSet graphs;  // with distance tables
  std::map<std::string, UserModel> users;

  const UserModel* user(const std::string& id) const;
  const NavGraph* graph(const std::string& id) const;
};

// Sessions grouped by user, each group in time order.
std::map<std::string, std::vector<Session>> by_user(const std::vector<Session>& sessions);

// Column index of every hit of `sessions` in the user's context matrix,
// indexed [session][hit].
std::vector<std::vector<std::size_t>> column_index(const std::vector<Session>& sessions);

std::map<std::string, NavGraph> build_graphs(const std::map<std::string, std::vector<Session>>& users);

// Per-cluster decomposition followed by per-user filtering and rank training.
using UserSessions = std::map<std::string, std::vector<Session>>;

// Users of one cluster whose context matrices enter its tensor.
struct TensorPlan {
  int cluster = 0;
  std::vector<std::string> users;  // sorted
  std::size_t columns = 0;         // T, the longest member history
};

struct ClusterFit {
  TensorPlan plan;
  std::uint64_t seed = 0;
  Parafac2Result result;
};

// Training in stages. Each stage fills in more of the TrainedSystem and
// train_system runs them back to back.
void fit_graphs(TrainedSystem& sys, const UserSessions& users);
// Creates one UserModel per user (layout and cluster) and returns every
// user's context matrix. Needs fit_graphs for the clustering.
std::map<std::string, ContextMatrix> fit_context(TrainedSystem& sys, const UserSessions& users);
// Members with fewer context rows than the rank are left out, as are
// clusters whose longest history is shorter than the rank.
std::vector<TensorPlan> plan_tensors(const TrainedSystem& sys,
                                     const std::map<std::string, ContextMatrix>& matrices);
std::vector<ClusterFit> fit_factors(const TrainedSystem& sys,
                                    const std::map<std::string, ContextMatrix>& matrices,
                                    const std::vector<TensorPlan>& plans);
// Loading, projector and the user's filter, evolved over the training views.
void fit_filters(TrainedSystem& sys, const std::map<std::string, ContextMatrix>& matrices,
                 const std::vector<ClusterFit>& fits);
void fit_rank_models(TrainedSystem& sys, const UserSessions& users,
                     const std::map<std::string, ContextMatrix>& matrices);

TrainedSystem train_system(const std::vector<Session>& train, const SystemOptions& options);

// Training sessions labeled with their final target, carrying the given
// per-view factors (rows of `factors` in context-matrix column order).
std::vector<LabeledSession> label_sessions(const std::vector<Session>& sessions,
                                           const NavGraph& graph, const Eigen::MatrixXd& factors);

struct ViewFactors {
  bool observed = false;      // the view's (metric, element) is in the layout
  Eigen::VectorXd evolved;    // a posteriori factor after this view
  Eigen::VectorXd projected;  // least-squares factor of this view alone
};

// One predict/update step of the user's filter for a new report view.
ViewFactors observe(const UserModel& model, KalmanState& state, const HitRecord& hit);

}  // namespace intentrec
