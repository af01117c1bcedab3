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

// intentrec: stage-by-stage driver for the recommendation pipeline.
//
//   intentrec synth --workdir w
//   intentrec ingest --workdir w
//   intentrec graph | tensor | factorize | kalman | train-rank --workdir w
//   intentrec recommend --workdir w [--user u --current r]
//   intentrec evaluate --workdir w
//   intentrec sweep --workdir w --ranks 2,5,8

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "intentrec/config.hpp"
#include "intentrec/error.hpp"
#include "intentrec/eval.hpp"
#include "intentrec/ingest.hpp"
#include "intentrec/pipeline.hpp"
#include "intentrec/synth.hpp"
#include "intentrec/system.hpp"

namespace {

using namespace intentrec;
using json = nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitData = 4;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path input_hits(const PipelineConfig& cfg, const Workdir& wd) {
  return cfg.input.empty() ? wd.hits() : fs::path(cfg.input);
}

void finish(const Workdir& wd, const PipelineConfig& cfg, const std::string& stage,
            std::vector<fs::path> inputs, std::vector<fs::path> outputs, const Stopwatch& clock) {
  StageRecord rec;
  rec.stage = stage;
  rec.config = cfg.to_json();
  rec.inputs = std::move(inputs);
  rec.outputs = std::move(outputs);
  rec.seconds = clock.seconds();
  record_stage(wd, rec);
  spdlog::info("{}: done in {:.2f}s", stage, rec.seconds);
}

void run_synth(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  SynthConfig sc = cfg.synth;
  sc.seed = cfg.seed;
  const auto hits = generate(sc);
  const fs::path out_path = cfg.output.empty() ? wd.hits() : fs::path(cfg.output);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write " + out_path.string());
  write_hits_jsonl(out, hits);
  out.close();
  spdlog::info("synth: {} hits for {} users -> {}", hits.size(), sc.n_users, out_path.string());
  finish(wd, cfg, "synth", {}, {out_path}, clock);
}

void run_ingest(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  const fs::path in_path = input_hits(cfg, wd);
  require_artifact("ingest", in_path);
  std::ifstream in(in_path);
  if (!in) throw IoError("cannot read " + in_path.string());
  const ParseResult parsed = parse_hits(in, cfg.hit_format(in_path.string()));
  if (parsed.skipped > 0) spdlog::warn("ingest: skipped {} malformed rows", parsed.skipped);
  const auto sessions = sessionize(parsed.hits, cfg.timeout);
  const Dataset data = temporal_split(sessions, cfg.train_fraction);
  save_dataset(wd, data);
  spdlog::info("ingest: {} hits, {} train and {} test sessions", parsed.hits.size(),
               data.train.size(), data.test.size());
  finish(wd, cfg, "ingest", {in_path}, {wd.sessions_dir()}, clock);
}

void run_graph(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  const Dataset data = load_dataset(wd, "graph");
  TrainedSystem sys;
  sys.options = cfg.system_options();
  fit_graphs(sys, by_user(data.train));
  save_graphs(wd, sys);
  spdlog::info("graph: {} user graphs", sys.graphs.graphs.size());
  finish(wd, cfg, "graph", {wd.sessions_dir()}, {wd.graphs_dir()}, clock);
}

void run_tensor(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  const Dataset data = load_dataset(wd, "tensor");
  TrainedSystem sys;
  sys.options = cfg.system_options();
  load_graphs(wd, "tensor", sys);
  const auto matrices = fit_context(sys, by_user(data.train));
  const auto plans = plan_tensors(sys, matrices);
  save_context(wd, matrices, plans, cfg.rank);
  spdlog::info("tensor: {} context matrices, {} cluster tensors", matrices.size(), plans.size());
  finish(wd, cfg, "tensor", {wd.sessions_dir(), wd.graphs_dir()}, {wd.context_dir()}, clock);
}

int tensor_rank(const Workdir& wd, const std::string& stage) {
  require_artifact(stage, wd.tensors());
  std::ifstream in(wd.tensors());
  return json::parse(in).at("rank").get<int>();
}

void run_factorize(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  TrainedSystem sys;
  sys.options = cfg.system_options();
  const int rank = tensor_rank(wd, "factorize");
  if (rank != cfg.rank) {
    spdlog::warn("factorize: using rank {} fixed by the tensor stage, not {}", rank, cfg.rank);
  }
  sys.options.parafac2.rank = rank;
  load_graphs(wd, "factorize", sys);
  const auto matrices = load_context(wd, "factorize", sys);
  const auto fits = fit_factors(sys, matrices, load_tensor_plans(wd, "factorize"));
  save_cluster_fits(wd, fits, rank);
  for (const auto& f : fits) {
    spdlog::info("factorize: cluster {} ({} users, T={}) {} sweeps, error {:.6g}", f.plan.cluster,
                 f.plan.users.size(), f.plan.columns, f.result.report.iterations,
                 f.result.report.errors.empty() ? 0.0 : f.result.report.errors.back());
  }
  finish(wd, cfg, "factorize", {wd.context_dir()}, {wd.factors_dir()}, clock);
}

void run_kalman(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  TrainedSystem sys;
  sys.options = cfg.system_options();
  load_graphs(wd, "kalman", sys);
  const auto matrices = load_context(wd, "kalman", sys);
  const auto fits = load_cluster_fits(wd, "kalman");
  fit_filters(sys, matrices, fits);
  save_filters(wd, sys);
  finish(wd, cfg, "kalman", {wd.context_dir(), wd.factors_dir()}, {wd.kalman_dir()}, clock);
}

void run_train_rank(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  const Dataset data = load_dataset(wd, "train-rank");
  TrainedSystem sys;
  sys.options = cfg.system_options();
  load_graphs(wd, "train-rank", sys);
  const auto matrices = load_context(wd, "train-rank", sys);
  const auto fits = load_cluster_fits(wd, "train-rank");
  load_filters(wd, "train-rank", fits, sys);
  fit_rank_models(sys, by_user(data.train), matrices);
  save_rank_models(wd, sys);
  finish(wd, cfg, "train-rank",
         {wd.sessions_dir(), wd.graphs_dir(), wd.context_dir(), wd.factors_dir(), wd.kalman_dir()},
         {wd.rank_model()}, clock);
}

std::vector<fs::path> trained_inputs(const Workdir& wd) {
  return {wd.graphs_dir(), wd.context_dir(), wd.factors_dir(), wd.kalman_dir(), wd.rank_model()};
}

void run_recommend(const PipelineConfig& cfg, const Workdir& wd, const std::string& user,
                   const std::string& current) {
  Stopwatch clock;
  TrainedSystem sys = load_system(wd, "recommend", cfg.system_options());
  const RelevanceVariant variant = cfg.relevance_variant();
  const Method method = method_from_string(to_string(variant));
  const auto k = static_cast<std::size_t>(cfg.k);

  if (!user.empty() || !current.empty()) {
    if (user.empty() || current.empty()) {
      throw ArgumentError("--user and --current must be given together");
    }
    const UserModel* model = sys.user(user);
    if (!model) throw LookupError("unknown user " + user);
    ViewFactors vf;
    if (model->factorized) {
      vf.observed = true;
      vf.evolved = model->state.f_post;
      vf.projected = Eigen::VectorXd::Zero(model->state.f_post.size());
    }
    auto recs = method_candidates(sys, user, current, method, model->factorized ? &vf : nullptr,
                                  cfg.group);
    std::cout << recommendations_to_json(user, current, k, rank(std::move(recs), k), variant).dump()
              << '\n';
    return;
  }

  const Dataset data = load_dataset(wd, "recommend");
  std::ofstream out(wd.recommendations());
  if (!out) throw IoError("cannot write " + wd.recommendations().string());
  std::size_t lines = 0;
  for (const auto& [id, sessions] : by_user(data.test)) {
    const UserModel* model = sys.user(id);
    if (!model || !sys.graph(id)) continue;
    KalmanState state = model->state;
    for (const auto& s : sessions) {
      for (std::size_t t = 0; t < s.hits.size(); ++t) {
        const HitRecord& hit = s.hits[t];
        ViewFactors vf;
        if (model->factorized) vf = observe(*model, state, hit);
        if (!sys.graph(id)->contains(hit.report_id)) continue;
        auto shown = rank(method_candidates(sys, id, hit.report_id, method,
                                            model->factorized ? &vf : nullptr, cfg.group),
                          k);
        out << recommendations_to_json(id, hit.report_id, k, shown, variant).dump() << '\n';
        ++lines;
        if (cfg.feedback && t + 1 < s.hits.size() && !shown.empty()) {
          const std::string& next = s.hits[t + 1].report_id;
          bool clicked = false;
          for (const auto& r : shown) clicked = clicked || r.node == next;
          FeedbackEvent ev{clicked ? FeedbackKind::kExplicitPositive
                                   : FeedbackKind::kImplicitNegative,
                           clicked ? next : std::string()};
          apply_feedback(sys.graphs.graphs.at(id), shown, ev, cfg.eta);
        }
      }
    }
  }
  out.close();
  spdlog::info("recommend: {} recommendation lists -> {}", lines, wd.recommendations().string());
  auto inputs = trained_inputs(wd);
  inputs.push_back(wd.sessions_dir());
  finish(wd, cfg, "recommend", inputs, {wd.recommendations()}, clock);
}

void print_result(const BenchmarkResult& result) {
  std::cout << format_table(result.reports);
  std::cout << "users " << result.users << ", filtered " << result.filtered_users
            << ", skipped unseen events " << result.skipped_unseen << '\n';
}

void run_evaluate(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  const TrainedSystem sys = load_system(wd, "evaluate", cfg.system_options());
  const Dataset data = load_dataset(wd, "evaluate");
  const BenchmarkResult result = run_benchmark(sys, data.test, cfg.benchmark_options());
  print_result(result);
  std::ofstream out(wd.results());
  if (!out) throw IoError("cannot write " + wd.results().string());
  write_results_csv(out, result.reports);
  out.close();
  auto inputs = trained_inputs(wd);
  inputs.push_back(wd.sessions_dir());
  finish(wd, cfg, "evaluate", inputs, {wd.results()}, clock);
}

void run_sweep(const PipelineConfig& cfg, const Workdir& wd) {
  Stopwatch clock;
  const Dataset data = load_dataset(wd, "sweep");
  const std::string method = to_string(method_from_string(cfg.variant));
  const fs::path sweep_path = wd.root / "sweep.csv";
  std::ofstream csv(sweep_path);
  if (!csv) throw IoError("cannot write " + sweep_path.string());
  csv << "rank,method,ndcg,precision,recall,wauc,events\n";
  std::printf("%4s  %-10s %8s %10s %8s %8s\n", "R", "Method", "NDCG", "Precision", "Recall",
              "w-AUC");
  int best_rank = 0;
  double best_ndcg = -1.0;
  for (int r : cfg.ranks) {
    PipelineConfig c = cfg;
    c.rank = r;
    const TrainedSystem sys = train_system(data.train, c.system_options());
    BenchmarkOptions bo = c.benchmark_options();
    bo.methods = {method_from_string(cfg.variant)};
    const auto result = run_benchmark(sys, data.test, bo);
    if (result.reports.empty()) throw DataError("sweep: the test split has no evaluation events");
    const EvalReport& rep = result.reports.front();
    std::printf("%4d  %-10s %8.4f %10.4f %8.4f %8.4f\n", r, rep.method.c_str(), rep.ndcg,
                rep.precision, rep.recall, rep.wauc);
    char line[256];
    std::snprintf(line, sizeof(line), "%d,%s,%.6f,%.6f,%.6f,%.6f,%zu\n", r, rep.method.c_str(),
                  rep.ndcg, rep.precision, rep.recall, rep.wauc, rep.events);
    csv << line;
    if (rep.ndcg > best_ndcg) {
      best_ndcg = rep.ndcg;
      best_rank = r;
    }
  }
  std::printf("best R = %d (%s NDCG %.4f)\n", best_rank, method.c_str(), best_ndcg);
  csv.close();
  finish(wd, cfg, "sweep", {wd.sessions_dir()}, {sweep_path}, clock);
}

// Looks for --config before CLI11 runs so that flags can override the file.
std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_pattern("[%l] %v");
  PipelineConfig cfg;
  std::string config_path;
  std::string user, current;

  CLI::App app{"Intent-aware report recommendation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  try {
    config_path = find_config(argc, argv);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot read config " + config_path);
      cfg.merge_json(json::parse(in));
    }
  } catch (const json::exception& e) {
    std::cerr << "error: config " << config_path << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  app.add_option("--config", config_path, "JSON config file; flags override it");
  app.add_option("--workdir", cfg.workdir, "Directory holding the stage artifacts");
  app.add_option("--input", cfg.input, "Hits file for ingest (default <workdir>/hits.jsonl)");
  app.add_option("--output", cfg.output, "Hits file written by synth (default <workdir>/hits.jsonl)");
  app.add_option("--format", cfg.format, "Input format: jsonl or csv (default from extension)");
  app.add_option("--timeout", cfg.timeout, "Session gap in seconds");
  app.add_option("--train-fraction", cfg.train_fraction, "Share of hits used for training");
  app.add_option("--rank", cfg.rank, "Latent rank R");
  app.add_option("--ranks", cfg.ranks, "Ranks tried by sweep")->delimiter(',');
  app.add_option("--lambda", cfg.lambda, "RankSVM slack weight");
  app.add_option("--eta", cfg.eta, "Feedback learning rate");
  app.add_option("--variant", cfg.variant, "Relevance variant: Sum-I, Max-I, Max-IxD, Dot-IxD");
  app.add_option("--k", cfg.k, "Recommendation list length");
  app.add_option("--seed", cfg.seed, "Seed for generation, clustering and training");
  app.add_option("--min-unique-reports", cfg.min_unique_reports,
                 "Skip test users whose graph has fewer reports");
  app.add_option("--starts", cfg.starts, "Independent PARAFAC2 fits per cluster");
  app.add_option("--process-noise", cfg.process_noise, "Kalman process noise q");
  app.add_flag("--group,!--no-group", cfg.group, "Collaborative candidates for novice users");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic hit log");
  synth->add_option("--users", cfg.synth.n_users, "Number of users");
  synth->add_option("--reports", cfg.synth.n_reports, "Number of reports");
  synth->add_option("--rho", cfg.synth.rho, "Context signal strength in [0, 1]");
  synth->add_option("--sessions-per-user", cfg.synth.sessions_per_user, "Base sessions per user");
  synth->add_option("--intents-per-user", cfg.synth.intents_per_user, "Planted intents per user");
  synth->add_option("--days", cfg.synth.days, "Days covered by the log");

  auto* ingest = app.add_subcommand("ingest", "Parse, sessionize and split the hit log");
  auto* graph = app.add_subcommand("graph", "Build navigation graphs and user clusters");
  auto* tensor = app.add_subcommand("tensor", "Build context matrices and cluster tensors");
  auto* factorize = app.add_subcommand("factorize", "PARAFAC2 decomposition per cluster");
  auto* kalman = app.add_subcommand("kalman", "Fit and run the latent factor filters");
  auto* train_rank = app.add_subcommand("train-rank", "Train per-intent ranking models");
  auto* recommend = app.add_subcommand("recommend", "Recommendations for test views or one query");
  recommend->add_option("--user", user, "Query user");
  recommend->add_option("--current", current, "Report the user is looking at");
  recommend->add_flag("--feedback", cfg.feedback, "Adapt alpha/beta from the replayed clicks");
  auto* evaluate = app.add_subcommand("evaluate", "Benchmark every method on the test split");
  auto* sweep = app.add_subcommand("sweep", "Evaluate the chosen variant over several ranks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const std::vector<std::pair<CLI::App*, std::function<void(const Workdir&)>>> stages = {
      {synth, [&](const Workdir& wd) { run_synth(cfg, wd); }},
      {ingest, [&](const Workdir& wd) { run_ingest(cfg, wd); }},
      {graph, [&](const Workdir& wd) { run_graph(cfg, wd); }},
      {tensor, [&](const Workdir& wd) { run_tensor(cfg, wd); }},
      {factorize, [&](const Workdir& wd) { run_factorize(cfg, wd); }},
      {kalman, [&](const Workdir& wd) { run_kalman(cfg, wd); }},
      {train_rank, [&](const Workdir& wd) { run_train_rank(cfg, wd); }},
      {recommend, [&](const Workdir& wd) { run_recommend(cfg, wd, user, current); }},
      {evaluate, [&](const Workdir& wd) { run_evaluate(cfg, wd); }},
      {sweep, [&](const Workdir& wd) { run_sweep(cfg, wd); }},
  };

  try {
    cfg.validate();
    Workdir wd{cfg.workdir};
    fs::create_directories(wd.root);
    for (const auto& [cmd, run] : stages) {
      if (cmd->parsed()) run(wd);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissingArtifact;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const LookupError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
