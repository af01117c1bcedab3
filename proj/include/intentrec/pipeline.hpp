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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intentrec/ingest.hpp"
#include "intentrec/system.hpp"

namespace intentrec {

namespace fs = std::filesystem;

// Workdir layout shared by the pipeline stages.
//
//   sessions/{train,test}.jsonl, sessions/split.json   ingest
//   graphs/<user>.json, graphs/clustering.json         graph
//   context/<user>.csv, context/<user>.layout.json,
//   context/tensors.json                               tensor
//   factors/index.json, factors/cluster_<c>/           factorize
//   kalman/<user>.json, kalman/fhat_<user>.csv         kalman
//   rankmodel.json                                     train-rank
//   recommendations.jsonl                              recommend
//   results.csv                                        evaluate
//   manifest.json                                      every stage
struct Workdir {
  fs::path root;

  fs::path hits() const { return root / "hits.jsonl"; }
  fs::path sessions_dir() const { return root / "sessions"; }
  fs::path train_sessions() const { return sessions_dir() / "train.jsonl"; }
  fs::path test_sessions() const { return sessions_dir() / "test.jsonl"; }
  fs::path split() const { return sessions_dir() / "split.json"; }
  fs::path graphs_dir() const { return root / "graphs"; }
  fs::path clustering() const { return graphs_dir() / "clustering.json"; }
  fs::path context_dir() const { return root / "context"; }
  fs::path tensors() const { return context_dir() / "tensors.json"; }
  fs::path factors_dir() const { return root / "factors"; }
  fs::path factors_index() const { return factors_dir() / "index.json"; }
  fs::path kalman_dir() const { return root / "kalman"; }
  fs::path rank_model() const { return root / "rankmodel.json"; }
  fs::path recommendations() const { return root / "recommendations.jsonl"; }
  fs::path results() const { return root / "results.csv"; }
  fs::path manifest() const { return root / "manifest.json"; }
};

// Throws StageError naming `path` when it does not exist.
void require_artifact(const std::string& stage, const fs::path& path);

// Hex FNV-1a of the file contents.
std::string file_hash(const fs::path& path);

// Sessions are stored as hit JSONL with the session hint rewritten to
// "<user>#<n>" so that reading them back reproduces the same sessions.
void write_sessions(const fs::path& path, const std::vector<Session>& sessions);
std::vector<Session> read_sessions(const fs::path& path);

void save_dataset(const Workdir& wd, const Dataset& data);
Dataset load_dataset(const Workdir& wd, const std::string& stage);

void save_graphs(const Workdir& wd, const TrainedSystem& sys);
void load_graphs(const Workdir& wd, const std::string& stage, TrainedSystem& sys);

void save_context(const Workdir& wd, const std::map<std::string, ContextMatrix>& matrices,
                  const std::vector<TensorPlan>& plans, int rank);
// Also creates the UserModel entries, as fit_context does.
std::map<std::string, ContextMatrix> load_context(const Workdir& wd, const std::string& stage,
                                                  TrainedSystem& sys);
std::vector<TensorPlan> load_tensor_plans(const Workdir& wd, const std::string& stage);

void save_cluster_fits(const Workdir& wd, const std::vector<ClusterFit>& fits, int rank);
std::vector<ClusterFit> load_cluster_fits(const Workdir& wd, const std::string& stage);

void save_filters(const Workdir& wd, const TrainedSystem& sys);
// Restores loading, projector, filter state and fhat of every factorized user.
void load_filters(const Workdir& wd, const std::string& stage,
                  const std::vector<ClusterFit>& fits, TrainedSystem& sys);

void save_rank_models(const Workdir& wd, const TrainedSystem& sys);
void load_rank_models(const Workdir& wd, const std::string& stage, TrainedSystem& sys);

// Everything recommend and evaluate need, checked in pipeline order.
TrainedSystem load_system(const Workdir& wd, const std::string& stage,
                          const SystemOptions& options);

// Records one stage run in manifest.json, keeping entries of other stages.
struct StageRecord {
  std::string stage;
  nlohmann::json config;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;  // files or directories
  double seconds = 0.0;
};
void record_stage(const Workdir& wd, const StageRecord& record);

}  // namespace intentrec
