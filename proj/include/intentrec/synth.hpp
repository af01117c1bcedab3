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

#include <nlohmann/json_fwd.hpp>

#include "intentrec/ingest.hpp"

namespace intentrec {

struct SynthConfig {
  int n_users = 200;
  int n_reports = 60;
  int n_clusters = 4;
  int sessions_per_user = 20;     // scaled by (1 + c) / 2 for activity cluster c
  int intents_per_user = 4;
  int hubs_per_user = 2;
  int branch_length = 3;         // habit chain in front of each intent
  double mean_branch_steps = 3.0;  // geometric; the walk may jump to the intent early
  double detour_probability = 0.01;
  double preference_spread = 0.2;  // intent weights uniform in 1 +- spread
  double rho = 0.8;              // context signal strength in [0, 1]
  int series_length = 8;
  double timeseries_fraction = 0.8;
  int days = 10;
  std::uint64_t seed = 1;

  void validate() const;  // throws ArgumentError
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);  // missing keys keep defaults
};

struct SynthUser {
  std::string user_id;
  int cluster = 0;
  std::vector<std::string> intents;
  std::vector<std::string> hubs;
  std::map<std::string, std::vector<std::string>> branches;  // intent -> chain
  int sessions = 0;
};

struct SynthData {
  std::vector<HitRecord> hits;  // grouped by user, time ordered
  std::vector<SynthUser> users;
};

SynthData generate_with_truth(const SynthConfig& config);
std::vector<HitRecord> generate(const SynthConfig& config);

// Expected hits of one session under `config`.
double expected_session_length(const SynthConfig& config);
// Expected sessions of one user, averaged over activity clusters.
double expected_sessions_per_user(const SynthConfig& config);

}  // namespace intentrec
