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

#include "intentrec/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "intentrec/error.hpp"
#include "intentrec/hash.hpp"
#include "intentrec/matrix_io.hpp"

namespace intentrec {

namespace {

using json = nlohmann::json;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return M;
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Distinct users must not share a file stem.
std::map<std::string, std::string> stems(const std::vector<std::string>& users) {
  std::map<std::string, std::string> out;
  std::set<std::string> seen;
  for (const auto& u : users) {
    std::string stem = safe_file_stem(u);
    if (!seen.insert(stem).second) {
      throw DataError("user ids collide after file name sanitizing: " + stem);
    }
    out.emplace(u, std::move(stem));
  }
  return out;
}

std::vector<std::string> user_list(const TrainedSystem& sys) {
  std::vector<std::string> out;
  for (const auto& [user, _] : sys.clustering.assignments) out.push_back(user);
  return out;
}

fs::path cluster_dir(const Workdir& wd, int cluster) {
  return wd.factors_dir() / ("cluster_" + std::to_string(cluster));
}

void hash_into(json& out, const fs::path& root, const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out[fs::relative(f, root).generic_string()] = file_hash(f);
  } else if (fs::exists(path)) {
    out[fs::relative(path, root).generic_string()] = file_hash(path);
  }
}

}  // namespace

void require_artifact(const std::string& stage, const fs::path& path) {
  if (!fs::exists(path)) throw StageError(stage, path.string());
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_sessions(const fs::path& path, const std::vector<Session>& sessions) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::map<std::string, std::size_t> counter;
  for (const auto& s : sessions) {
    const std::string hint = s.user_id + "#" + std::to_string(counter[s.user_id]++);
    for (HitRecord h : s.hits) {
      h.session_hint = hint;
      out << hit_to_jsonl(h) << '\n';
    }
  }
}

std::vector<Session> read_sessions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  const ParseResult parsed = parse_hits(in, HitFormat::kJsonl);
  if (parsed.skipped > 0) throw FormatError(path.string() + ": malformed session rows");
  return sessionize(parsed.hits);
}

void save_dataset(const Workdir& wd, const Dataset& data) {
  fs::create_directories(wd.sessions_dir());
  write_sessions(wd.train_sessions(), data.train);
  write_sessions(wd.test_sessions(), data.test);
  json split;
  split["split_instant"] = data.split_instant;
  split["train_sessions"] = data.train.size();
  split["test_sessions"] = data.test.size();
  write_json(wd.split(), split);
}

Dataset load_dataset(const Workdir& wd, const std::string& stage) {
  require_artifact(stage, wd.train_sessions());
  require_artifact(stage, wd.test_sessions());
  require_artifact(stage, wd.split());
  Dataset data;
  data.train = read_sessions(wd.train_sessions());
  data.test = read_sessions(wd.test_sessions());
  data.split_instant = read_json(wd.split()).at("split_instant").get<Timestamp>();
  return data;
}

void save_graphs(const Workdir& wd, const TrainedSystem& sys) {
  fs::create_directories(wd.graphs_dir());
  for (const auto& [user, stem] : stems(user_list(sys))) {
    write_json(wd.graphs_dir() / (stem + ".json"), sys.graphs.graphs.at(user).to_json());
  }
  write_json(wd.clustering(), sys.clustering.to_json());
}

void load_graphs(const Workdir& wd, const std::string& stage, TrainedSystem& sys) {
  require_artifact(stage, wd.clustering());
  sys.clustering = UserClustering::from_json(read_json(wd.clustering()));
  sys.graphs.graphs.clear();
  sys.graphs.distances.clear();
  for (const auto& [user, stem] : stems(user_list(sys))) {
    const fs::path path = wd.graphs_dir() / (stem + ".json");
    require_artifact(stage, path);
    NavGraph g = NavGraph::from_json(read_json(path));
    sys.graphs.distances.emplace(user, all_intent_distances(g));
    sys.graphs.graphs.emplace(user, std::move(g));
  }
}

void save_context(const Workdir& wd, const std::map<std::string, ContextMatrix>& matrices,
                  const std::vector<TensorPlan>& plans, int rank) {
  fs::create_directories(wd.context_dir());
  std::vector<std::string> users;
  for (const auto& [user, _] : matrices) users.push_back(user);
  for (const auto& [user, stem] : stems(users)) {
    const ContextMatrix& m = matrices.at(user);
    write_matrix_csv(wd.context_dir() / (stem + ".csv"), m.X);
    write_json(wd.context_dir() / (stem + ".layout.json"), m.layout.to_json());
  }
  json j;
  j["rank"] = rank;
  j["users"] = users;
  j["tensors"] = json::array();
  for (const auto& p : plans) {
    j["tensors"].push_back({{"cluster", p.cluster}, {"users", p.users}, {"columns", p.columns}});
  }
  write_json(wd.tensors(), j);
}

std::map<std::string, ContextMatrix> load_context(const Workdir& wd, const std::string& stage,
                                                  TrainedSystem& sys) {
  require_artifact(stage, wd.tensors());
  const json j = read_json(wd.tensors());
  std::map<std::string, ContextMatrix> matrices;
  sys.users.clear();
  for (const auto& [user, stem] : stems(j.at("users").get<std::vector<std::string>>())) {
    const fs::path csv = wd.context_dir() / (stem + ".csv");
    const fs::path layout = wd.context_dir() / (stem + ".layout.json");
    require_artifact(stage, csv);
    require_artifact(stage, layout);
    ContextMatrix m;
    m.user_id = user;
    m.layout = FeatureLayout::from_json(read_json(layout));
    m.X = read_matrix_csv(csv);
    if (m.X.rows() == 0 && m.layout.rows() > 0) {
      throw FormatError(csv.string() + ": empty context matrix");
    }
    if (m.X.size() == 0) m.X.resize(static_cast<Eigen::Index>(m.layout.rows()), 0);
    UserModel model;
    model.user_id = user;
    model.cluster = sys.clustering.cluster_of(user);
    model.layout = m.layout;
    sys.users.emplace(user, std::move(model));
    matrices.emplace(user, std::move(m));
  }
  return matrices;
}

std::vector<TensorPlan> load_tensor_plans(const Workdir& wd, const std::string& stage) {
  require_artifact(stage, wd.tensors());
  std::vector<TensorPlan> plans;
  const json j = read_json(wd.tensors());
  for (const auto& t : j.at("tensors")) {
    TensorPlan p;
    p.cluster = t.at("cluster").get<int>();
    p.users = t.at("users").get<std::vector<std::string>>();
    p.columns = t.at("columns").get<std::size_t>();
    plans.push_back(std::move(p));
  }
  return plans;
}

void save_cluster_fits(const Workdir& wd, const std::vector<ClusterFit>& fits, int rank) {
  fs::create_directories(wd.factors_dir());
  json index;
  index["rank"] = rank;
  index["clusters"] = json::array();
  for (const auto& fit : fits) {
    stems(fit.plan.users);
    save_factors(cluster_dir(wd, fit.plan.cluster), fit.plan.users, fit.result, fit.seed);
    index["clusters"].push_back({{"cluster", fit.plan.cluster},
                                 {"users", fit.plan.users},
                                 {"columns", fit.plan.columns},
                                 {"seed", fit.seed}});
  }
  write_json(wd.factors_index(), index);
}

std::vector<ClusterFit> load_cluster_fits(const Workdir& wd, const std::string& stage) {
  require_artifact(stage, wd.factors_dir());
  require_artifact(stage, wd.factors_index());
  std::vector<ClusterFit> fits;
  const json index = read_json(wd.factors_index());
  for (const auto& c : index.at("clusters")) {
    ClusterFit fit;
    fit.plan.cluster = c.at("cluster").get<int>();
    fit.plan.users = c.at("users").get<std::vector<std::string>>();
    fit.plan.columns = c.at("columns").get<std::size_t>();
    fit.seed = c.at("seed").get<std::uint64_t>();
    const fs::path dir = cluster_dir(wd, fit.plan.cluster);
    require_artifact(stage, dir / "fit.json");
    fit.result = load_factors(dir, fit.plan.users);
    fits.push_back(std::move(fit));
  }
  return fits;
}

void save_filters(const Workdir& wd, const TrainedSystem& sys) {
  fs::create_directories(wd.kalman_dir());
  std::vector<std::string> users;
  for (const auto& [user, model] : sys.users) {
    if (model.factorized) users.push_back(user);
  }
  for (const auto& [user, stem] : stems(users)) {
    const UserModel& m = sys.users.at(user);
    json j;
    j["user_id"] = user;
    j["A"] = matrix_to_json(m.kalman.A);
    j["Q"] = matrix_to_json(m.kalman.Q);
    j["Psi"] = matrix_to_json(m.kalman.Psi);
    j["f_post"] = vector_to_json(m.state.f_post);
    j["P_post"] = matrix_to_json(m.state.P_post);
    write_json(wd.kalman_dir() / (stem + ".json"), j);
    write_matrix_csv(wd.kalman_dir() / ("fhat_" + stem + ".csv"), m.fhat);
  }
}

void load_filters(const Workdir& wd, const std::string& stage,
                  const std::vector<ClusterFit>& fits, TrainedSystem& sys) {
  require_artifact(stage, wd.kalman_dir());
  for (const auto& fit : fits) {
    for (std::size_t i = 0; i < fit.plan.users.size(); ++i) {
      const std::string& user = fit.plan.users[i];
      const std::string stem = safe_file_stem(user);
      const fs::path model_path = wd.kalman_dir() / (stem + ".json");
      const fs::path fhat_path = wd.kalman_dir() / ("fhat_" + stem + ".csv");
      require_artifact(stage, model_path);
      require_artifact(stage, fhat_path);
      auto it = sys.users.find(user);
      if (it == sys.users.end()) throw DataError("factorized user " + user + " has no context");
      UserModel& m = it->second;
      const json j = read_json(model_path);
      m.loading = fit.result.factors.loading_matrix(i);
      m.projector = m.loading.completeOrthogonalDecomposition().pseudoInverse();
      m.kalman.A = matrix_from_json(j.at("A"));
      m.kalman.Q = matrix_from_json(j.at("Q"));
      m.kalman.Psi = matrix_from_json(j.at("Psi"));
      m.kalman.Lambda = m.loading;
      m.kalman.check();
      m.state = KalmanState::initial(vector_from_json(j.at("f_post")));
      m.state.P_post = matrix_from_json(j.at("P_post"));
      m.fhat = read_matrix_csv(fhat_path);
      m.factorized = true;
    }
  }
}

void save_rank_models(const Workdir& wd, const TrainedSystem& sys) {
  json j = json::object();
  for (const auto& [user, m] : sys.users) {
    if (!m.factorized) continue;
    j[user] = {{"evolved", m.rank.to_json()}, {"projected", m.plain_rank.to_json()}};
  }
  write_json(wd.rank_model(), j);
}

void load_rank_models(const Workdir& wd, const std::string& stage, TrainedSystem& sys) {
  require_artifact(stage, wd.rank_model());
  const json j = read_json(wd.rank_model());
  for (auto& [user, m] : sys.users) {
    if (!m.factorized) continue;
    if (!j.contains(user)) throw DataError(wd.rank_model().string() + ": no model for " + user);
    m.rank = RankModel::from_json(j.at(user).at("evolved"));
    m.plain_rank = RankModel::from_json(j.at(user).at("projected"));
  }
}

TrainedSystem load_system(const Workdir& wd, const std::string& stage,
                          const SystemOptions& options) {
  require_artifact(stage, wd.clustering());
  require_artifact(stage, wd.tensors());
  require_artifact(stage, wd.factors_dir());
  require_artifact(stage, wd.kalman_dir());
  require_artifact(stage, wd.rank_model());
  TrainedSystem sys;
  sys.options = options;
  load_graphs(wd, stage, sys);
  load_context(wd, stage, sys);
  const auto fits = load_cluster_fits(wd, stage);
  load_filters(wd, stage, fits, sys);
  load_rank_models(wd, stage, sys);
  return sys;
}

void record_stage(const Workdir& wd, const StageRecord& record) {
  json manifest = json::object();
  if (fs::exists(wd.manifest())) manifest = read_json(wd.manifest());
  json entry;
  entry["config"] = record.config;
  entry["inputs"] = json::object();
  entry["outputs"] = json::object();
  for (const auto& p : record.inputs) hash_into(entry["inputs"], wd.root, p);
  for (const auto& p : record.outputs) hash_into(entry["outputs"], wd.root, p);
  entry["seconds"] = record.seconds;
  manifest["stages"][record.stage] = entry;
  write_json(wd.manifest(), manifest);
}

}  // namespace intentrec
