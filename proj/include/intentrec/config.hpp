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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "intentrec/eval.hpp"
#include "intentrec/ingest.hpp"
#include "intentrec/synth.hpp"
#include "intentrec/system.hpp"

namespace intentrec {

// Settings shared by every command line stage. A JSON config file fills
// these first and explicit flags override them.
struct PipelineConfig {
  std::string input;    // hits file for ingest; empty means <workdir>/hits.jsonl
  std::string workdir = "work";
  std::string output;   // synth target; empty means <workdir>/hits.jsonl
  std::string format;   // jsonl | csv; empty means guess from the extension
  Timestamp timeout = 1800;  // session gap in seconds
  double train_fraction = 0.7;
  int rank = 5;
  std::vector<int> ranks = {2, 5, 8};  // sweep
  double lambda = 1.0;
  double eta = kDefaultFeedbackRate;
  std::string variant = "Sum-I";
  int k = static_cast<int>(kDefaultTopK);
  std::uint64_t seed = 1;
  int min_unique_reports = static_cast<int>(kDefaultMinUniqueReports);
  int starts = 6;
  double process_noise = kDefaultProcessNoise;
  bool group = false;     // collaborative candidates for novices
  bool feedback = false;  // recommend: adapt alpha/beta while replaying
  SynthConfig synth;

  void validate() const;  // throws ArgumentError
  HitFormat hit_format(const std::string& path) const;
  RelevanceVariant relevance_variant() const;

  SystemOptions system_options() const;
  BenchmarkOptions benchmark_options() const;

  nlohmann::json to_json() const;
  // Missing keys keep their current values.
  void merge_json(const nlohmann::json& j);
};

}  // namespace intentrec
