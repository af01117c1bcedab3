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

#include "intentrec/config.hpp"

#include <nlohmann/json.hpp>

#include "intentrec/error.hpp"

namespace intentrec {

void PipelineConfig::validate() const {
  if (workdir.empty()) throw ArgumentError("workdir must not be empty");
  if (!format.empty() && format != "jsonl" && format != "csv") {
    throw ArgumentError("format must be jsonl or csv, got " + format);
  }
  if (timeout <= 0) throw ArgumentError("timeout must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("train_fraction must lie in (0, 1)");
  }
  if (rank < 1) throw ArgumentError("rank must be >= 1");
  if (ranks.empty()) throw ArgumentError("ranks must not be empty");
  for (int r : ranks) {
    if (r < 1) throw ArgumentError("every sweep rank must be >= 1");
  }
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be positive");
  if (!(eta >= 0.0 && eta < 1.0)) throw ArgumentError("eta must lie in [0, 1)");
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (min_unique_reports < 0) throw ArgumentError("min_unique_reports must be >= 0");
  if (starts < 1) throw ArgumentError("starts must be >= 1");
  if (!(process_noise > 0.0)) throw ArgumentError("process_noise must be positive");
  relevance_variant();
  synth.validate();
}

HitFormat PipelineConfig::hit_format(const std::string& path) const {
  std::string f = format;
  if (f.empty()) {
    const auto dot = path.rfind('.');
    f = dot != std::string::npos && path.substr(dot) == ".csv" ? "csv" : "jsonl";
  }
  return f == "csv" ? HitFormat::kCsv : HitFormat::kJsonl;
}

RelevanceVariant PipelineConfig::relevance_variant() const {
  return variant_from_string(variant);
}

SystemOptions PipelineConfig::system_options() const {
  SystemOptions o;
  o.parafac2.rank = rank;
  o.parafac2.starts = starts;
  o.process_noise = process_noise;
  o.rank.lambda = lambda;
  o.seed = seed;
  return o;
}

BenchmarkOptions PipelineConfig::benchmark_options() const {
  BenchmarkOptions o;
  o.k = static_cast<std::size_t>(k);
  o.min_unique_reports = static_cast<std::size_t>(min_unique_reports);
  o.group_recommendations = group;
  return o;
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["input"] = input;
  j["workdir"] = workdir;
  j["output"] = output;
  j["format"] = format;
  j["timeout"] = timeout;
  j["train_fraction"] = train_fraction;
  j["rank"] = rank;
  j["ranks"] = ranks;
  j["lambda"] = lambda;
  j["eta"] = eta;
  j["variant"] = variant;
  j["k"] = k;
  j["seed"] = seed;
  j["min_unique_reports"] = min_unique_reports;
  j["starts"] = starts;
  j["process_noise"] = process_noise;
  j["group"] = group;
  j["feedback"] = feedback;
  j["synth"] = synth.to_json();
  return j;
}

void PipelineConfig::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("config: top level must be an object");
  try {
    input = j.value("input", input);
    workdir = j.value("workdir", workdir);
    output = j.value("output", output);
    format = j.value("format", format);
    timeout = j.value("timeout", timeout);
    train_fraction = j.value("train_fraction", train_fraction);
    rank = j.value("rank", rank);
    ranks = j.value("ranks", ranks);
    lambda = j.value("lambda", lambda);
    eta = j.value("eta", eta);
    variant = j.value("variant", variant);
    k = j.value("k", k);
    seed = j.value("seed", seed);
    min_unique_reports = j.value("min_unique_reports", min_unique_reports);
    starts = j.value("starts", starts);
    process_noise = j.value("process_noise", process_noise);
    group = j.value("group", group);
    feedback = j.value("feedback", feedback);
    if (j.contains("synth")) {
      nlohmann::json s = synth.to_json();
      s.update(j.at("synth"));
      synth = SynthConfig::from_json(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
}

}  // namespace intentrec
