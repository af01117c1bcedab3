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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "intentrec/ingest.hpp"

namespace intentrec {

inline constexpr std::size_t kFeaturesPerSlot = 6;
inline constexpr int kExperienceGroups = 4;

// [sum, max, min, argmax, longest positive run, mean |first difference|].
// Histograms populate only the sum.
using FeatureVector = std::array<double, kFeaturesPerSlot>;

FeatureVector extract_features(const HitRecord& hit);

using MetricElement = std::pair<std::string, std::string>;

struct FeatureLayout {
  std::string user_id;
  std::vector<MetricElement> slots;       // lexicographic (metric, element)
  std::map<std::string, std::size_t> elements_per_metric;  // d_m

  std::size_t metric_count() const { return elements_per_metric.size(); }  // M_u
  std::size_t pair_count() const { return slots.size(); }                  // D_u
  std::size_t rows() const { return kFeaturesPerSlot * slots.size(); }     // N_u
  // Slot index of a pair, or -1 when the user has never seen it.
  long slot_of(const MetricElement& pair) const;

  nlohmann::json to_json() const;
  static FeatureLayout from_json(const nlohmann::json& j);
};

FeatureLayout build_layout(const std::string& user_id, const std::vector<Session>& sessions);

// Context vector of one report view in `layout`. Returns an all-zero
// vector when the viewed pair is not part of the layout.
Eigen::VectorXd context_vector(const FeatureLayout& layout, const HitRecord& hit);

struct ContextMatrix {
  std::string user_id;
  FeatureLayout layout;
  Eigen::MatrixXd X;  // N_u x T_u, one column per hit in time order
};

ContextMatrix build_matrix(const std::vector<Session>& sessions);

struct UsageFeatures {
  std::string user_id;
  double browsing_seconds = 0.0;
  double transitions = 0.0;
  double distinct_reports = 0.0;
};

UsageFeatures usage_features(const std::vector<Session>& sessions);

struct UserClustering {
  std::map<std::string, int> assignments;  // cluster 3 = most active
  std::vector<Eigen::Vector3d> centroids;  // standardized space, by cluster id
  std::vector<bool> empty;
  bool insufficient = false;  // fewer than four users; everyone in cluster 0
  std::vector<double> objective_trace;  // within-cluster sum of squares per iteration

  int cluster_of(const std::string& user) const;
  std::vector<std::string> members(int cluster) const;

  nlohmann::json to_json() const;
  static UserClustering from_json(const nlohmann::json& j);
};

// k-means (k = 4) with k-means++ seeding on z-scored usage features.
UserClustering cluster_users(const std::vector<UsageFeatures>& users, std::uint64_t seed,
                             int max_iters = 100, double shift_tol = 1e-8);

struct ContextTensor {
  int cluster_id = 0;
  std::vector<std::string> users;           // sorted
  std::vector<Eigen::MatrixXd> slices;      // each N_u x T
  std::vector<std::size_t> original_columns;  // T_u before padding
  std::size_t columns = 0;                  // T
};

// Members are the users of `cluster_id` present in `matrices`. Shorter
// matrices are padded by cyclically repeating their own columns.
ContextTensor assemble_tensor(const std::vector<ContextMatrix>& matrices,
                              const UserClustering& clustering, int cluster_id);

// Cyclic padding of a single matrix to `columns` columns.
Eigen::MatrixXd pad_cyclic(const Eigen::MatrixXd& X, std::size_t columns);

}  // namespace intentrec
