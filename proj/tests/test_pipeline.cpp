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

#include <fstream>
#include <functional>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "intentrec/config.hpp"
#include "intentrec/error.hpp"
#include "intentrec/eval.hpp"
#include "intentrec/pipeline.hpp"
#include "intentrec/synth.hpp"

using namespace intentrec;

namespace {

Dataset small_dataset(std::uint64_t seed) {
  SynthConfig c;
  c.n_users = 16;
  c.sessions_per_user = 10;
  c.seed = seed;
  return temporal_split(sessionize(generate(c)), 0.7);
}

SystemOptions small_options() {
  SystemOptions o;
  o.parafac2.rank = 3;
  o.parafac2.starts = 2;
  o.seed = 5;
  return o;
}

// Runs every stage through the work directory, reloading between stages.
void staged_train(const Workdir& wd, const Dataset& data, const SystemOptions& options) {
  save_dataset(wd, data);
  {
    TrainedSystem sys;
    sys.options = options;
    fit_graphs(sys, by_user(load_dataset(wd, "graph").train));
    save_graphs(wd, sys);
  }
  {
    TrainedSystem sys;
    sys.options = options;
    load_graphs(wd, "tensor", sys);
    const auto matrices = fit_context(sys, by_user(load_dataset(wd, "tensor").train));
    save_context(wd, matrices, plan_tensors(sys, matrices), options.parafac2.rank);
  }
  {
    TrainedSystem sys;
    sys.options = options;
    load_graphs(wd, "factorize", sys);
    const auto matrices = load_context(wd, "factorize", sys);
    save_cluster_fits(wd, fit_factors(sys, matrices, load_tensor_plans(wd, "factorize")),
                      options.parafac2.rank);
  }
  {
    TrainedSystem sys;
    sys.options = options;
    load_graphs(wd, "kalman", sys);
    const auto matrices = load_context(wd, "kalman", sys);
    fit_filters(sys, matrices, load_cluster_fits(wd, "kalman"));
    save_filters(wd, sys);
  }
  {
    TrainedSystem sys;
    sys.options = options;
    load_graphs(wd, "train-rank", sys);
    const auto matrices = load_context(wd, "train-rank", sys);
    load_filters(wd, "train-rank", load_cluster_fits(wd, "train-rank"), sys);
    fit_rank_models(sys, by_user(load_dataset(wd, "train-rank").train), matrices);
    save_rank_models(wd, sys);
  }
}

std::string csv_of(const BenchmarkResult& r) {
  std::ostringstream out;
  write_results_csv(out, r.reports);
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("staged training reproduces in-memory training") {
  const Dataset data = small_dataset(3);
  const SystemOptions options = small_options();
  const Workdir wd{fresh_dir("intentrec_staged")};
  staged_train(wd, data, options);
  const TrainedSystem staged = load_system(wd, "evaluate", options);
  const TrainedSystem direct = train_system(data.train, options);

  BenchmarkOptions bo;
  bo.min_unique_reports = 1;
  const auto a = run_benchmark(direct, data.test, bo);
  const auto b = run_benchmark(staged, load_dataset(wd, "evaluate").test, bo);
  REQUIRE_FALSE(a.reports.empty());
  CHECK(csv_of(a) == csv_of(b));
  CHECK(a.users == b.users);
  for (const auto& [id, m] : direct.users) {
    REQUIRE(staged.user(id) != nullptr);
    CHECK(staged.user(id)->factorized == m.factorized);
    CHECK(staged.user(id)->state.f_post == m.state.f_post);
  }
  fs::remove_all(wd.root);
}

TEST_CASE("missing artifacts raise a stage error naming the file") {
  const Workdir wd{fresh_dir("intentrec_missing")};
  try {
    load_system(wd, "evaluate", small_options());
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.missing().find("clustering.json") != std::string::npos);
  }
  const Dataset data = small_dataset(4);
  staged_train(wd, data, small_options());
  fs::remove_all(wd.factors_dir());
  try {
    load_system(wd, "evaluate", small_options());
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.missing().find("factors") != std::string::npos);
  }
  CHECK_THROWS_AS(load_dataset(Workdir{wd.root / "nothing"}, "graph"), StageError);
  fs::remove_all(wd.root);
}

TEST_CASE("session files round trip") {
  const Dataset data = small_dataset(6);
  const fs::path dir = fresh_dir("intentrec_sessions");
  write_sessions(dir / "s.jsonl", data.train);
  const auto back = read_sessions(dir / "s.jsonl");
  REQUIRE(back.size() == data.train.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    REQUIRE(back[i].hits.size() == data.train[i].hits.size());
    CHECK(back[i].user_id == data.train[i].user_id);
    for (std::size_t j = 0; j < back[i].hits.size(); ++j) {
      CHECK(back[i].hits[j].values == data.train[i].hits[j].values);
      CHECK(back[i].hits[j].report_id == data.train[i].hits[j].report_id);
    }
  }
  CHECK(file_hash(dir / "s.jsonl").size() == 16);
  fs::remove_all(dir);
}

TEST_CASE("manifest records each stage") {
  const Workdir wd{fresh_dir("intentrec_manifest")};
  std::ofstream(wd.root / "a.txt") << "hello";
  StageRecord rec;
  rec.stage = "ingest";
  rec.config = {{"seed", 1}};
  rec.inputs = {wd.root / "a.txt"};
  rec.outputs = {wd.root / "a.txt"};
  rec.seconds = 0.5;
  record_stage(wd, rec);
  rec.stage = "graph";
  record_stage(wd, rec);
  std::ifstream in(wd.manifest());
  const auto j = nlohmann::json::parse(in);
  const std::string text = j.dump();
  CHECK(text.find("ingest") != std::string::npos);
  CHECK(text.find("graph") != std::string::npos);
  CHECK(text.find(file_hash(wd.root / "a.txt")) != std::string::npos);
  fs::remove_all(wd.root);
}

TEST_CASE("pipeline config validation and merging") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.relevance_variant() == RelevanceVariant::kSumI);
  CHECK(c.hit_format("x.csv") == HitFormat::kCsv);
  CHECK(c.hit_format("x.jsonl") == HitFormat::kJsonl);

  c.merge_json({{"rank", 8}, {"variant", "Max-IxD"}, {"synth", {{"rho", 0.25}}}});
  CHECK(c.rank == 8);
  CHECK(c.variant == "Max-IxD");
  CHECK(c.synth.rho == 0.25);
  CHECK(c.synth.n_users == SynthConfig{}.n_users);
  CHECK(c.system_options().parafac2.rank == 8);

  PipelineConfig copy;
  copy.merge_json(c.to_json());
  CHECK(copy.to_json() == c.to_json());

  CHECK_THROWS_AS(c.merge_json({{"rank", "five"}}), FormatError);
  for (auto mutate : std::vector<std::function<void(PipelineConfig&)>>{
           [](PipelineConfig& p) { p.rank = 0; },
           [](PipelineConfig& p) { p.train_fraction = 1.0; },
           [](PipelineConfig& p) { p.k = 0; },
           [](PipelineConfig& p) { p.eta = 1.0; },
           [](PipelineConfig& p) { p.variant = "bogus"; }}) {
    PipelineConfig p;
    mutate(p);
    CHECK_THROWS_AS(p.validate(), ArgumentError);
  }
}
