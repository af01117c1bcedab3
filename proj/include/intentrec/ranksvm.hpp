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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "intentrec/ingest.hpp"
#include "intentrec/navgraph.hpp"

namespace intentrec {

inline constexpr double kMaxWeightNorm = 4.0;

// Last target-flagged report of the session, if any.
std::optional<std::string> final_target(const Session& session, const NavGraph& graph);

// Latent factors of one session's views, with the session's final target.
struct LabeledSession {
  std::optional<std::string> target;
  std::vector<Eigen::VectorXd> factors;
};

struct RankTrainingSet {
  std::string intent;
  std::vector<Eigen::VectorXd> positives;  // R1, unit norm
  std::vector<Eigen::VectorXd> negatives;  // R2, unit norm
};

// One set per intent with at least one ending session. Zero factors are
// dropped; the rest are scaled to unit norm.
std::map<std::string, RankTrainingSet> build_training_sets(
    const std::vector<LabeledSession>& sessions);

struct RankOptions {
  double lambda = 1.0;
  int epochs = 200;
  int max_steps_per_epoch = 1000;  // an epoch is min(|P|, this) sampled pairs
  std::uint64_t seed = 0;
};

struct IntentModel {
  Eigen::VectorXd w;
  bool degenerate = false;      // one side of the pair set was empty
  double violation_rate = 0.0;  // fraction of pairs with <w, f_i> <= <w, f_j>
  double objective = 0.0;       // <w,w> + lambda * sum of hinge losses
  std::vector<double> objective_trace;  // per epoch, divided by |P|
};

// <w,w> + lambda * sum_{(i,j)} max(0, 1 - <w, f_i - f_j>), computed
// exactly over the full pair set.
double rank_objective(const RankTrainingSet& ts, const Eigen::VectorXd& w, double lambda);
double pairwise_violation_rate(const RankTrainingSet& ts, const Eigen::VectorXd& w);

// Stochastic subgradient descent on the hinge form of the large-margin
// ranking problem; returns the averaged iterate with ||w|| <= 4.
IntentModel train_intent(const RankTrainingSet& ts, const RankOptions& options);

// S_I(f) = clamp((4 + <w_I, f>) / 8, 0, 1).
double score_from_margin(double margin);

struct RankModel {
  double lambda = 1.0;
  std::map<std::string, IntentModel> intents;

  bool has_intent(const std::string& intent) const { return intents.count(intent) > 0; }
  // `f` is scaled to unit norm first; a zero factor scores 0.5. Throws
  // LookupError for unknown intents.
  double intent_score(const std::string& intent, const Eigen::VectorXd& f) const;
  std::map<std::string, double> intent_scores(const Eigen::VectorXd& f) const;

  nlohmann::json to_json() const;
  static RankModel from_json(const nlohmann::json& j);
};

RankModel train_rank_model(const std::vector<LabeledSession>& sessions,
                           const RankOptions& options);

}  // namespace intentrec
