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

#include "intentrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "intentrec/error.hpp"

namespace intentrec {
namespace {

const std::vector<std::string> kMetrics = {"pageviews", "revenue", "visits"};
const std::vector<std::string> kElements = {"desktop", "mobile", "other", "tablet"};

constexpr double kDwellMean = 45.0;
constexpr double kIntentDwellMean = 45.0;

std::string report_name(int r) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "r%03d", r);
  return buf;
}

std::string user_name(int u) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%04d", u);
  return buf;
}

int sessions_for_cluster(const SynthConfig& c, int cluster) {
  return std::max(1, static_cast<int>(std::lround(c.sessions_per_user * (1.0 + cluster) / 2.0)));
}

// Each report keeps one kind for every user.
ReportKind kind_of(int report, const SynthConfig& c) {
  std::mt19937_64 rng(c.seed * 7919ULL + static_cast<std::uint64_t>(report));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return unif(rng) < c.timeseries_fraction ? ReportKind::kTimeSeries : ReportKind::kHistogram;
}

// Deterministic content template of intent slot k.
double template_value(int k, int t, int length) {
  const double x = static_cast<double>(t) / std::max(1, length - 1);
  switch (k % 4) {
    case 0: return 1.0 + 2.0 * x;                  // rising
    case 1: return 3.0 - 2.0 * x;                  // falling
    case 2: return 2.0 + std::sin(6.283185307179586 * x);  // wave
    default: return t % 2 == 0 ? 3.0 : 1.0;        // alternating
  }
}

// Weighted sampling without replacement; the first pick is at the back.
std::vector<int> preference_order(const std::vector<double>& pref, std::mt19937_64& rng) {
  std::vector<double> left(pref);
  std::vector<int> order;
  for (std::size_t n = 0; n < pref.size(); ++n) {
    std::discrete_distribution<int> pick(left.begin(), left.end());
    const int k = pick(rng);
    order.push_back(k);
    left[static_cast<std::size_t>(k)] = 0.0;
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_users < 1 || n_reports < 1 || n_clusters < 1 || sessions_per_user < 1 ||
      intents_per_user < 1 || hubs_per_user < 1 || branch_length < 1 || series_length < 1 ||
      days < 1) {
    throw ArgumentError("synth: all counts must be >= 1");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw ArgumentError("synth: rho must lie in [0, 1]");
  if (!(mean_branch_steps >= 1.0)) throw ArgumentError("synth: mean_branch_steps must be >= 1");
  if (!(detour_probability >= 0.0 && detour_probability < 1.0)) {
    throw ArgumentError("synth: detour_probability must lie in [0, 1)");
  }
  if (!(preference_spread >= 0.0 && preference_spread < 1.0)) {
    throw ArgumentError("synth: preference_spread must lie in [0, 1)");
  }
  if (!(timeseries_fraction >= 0.0 && timeseries_fraction <= 1.0)) {
    throw ArgumentError("synth: timeseries_fraction must lie in [0, 1]");
  }
  const int per_user = hubs_per_user + intents_per_user * (1 + branch_length);
  if (per_user > n_reports) {
    throw ArgumentError("synth: n_reports too small for hubs, intents and branches");
  }
}

nlohmann::json SynthConfig::to_json() const {
  return {{"n_users", n_users},
          {"n_reports", n_reports},
          {"n_clusters", n_clusters},
          {"sessions_per_user", sessions_per_user},
          {"intents_per_user", intents_per_user},
          {"hubs_per_user", hubs_per_user},
          {"branch_length", branch_length},
          {"mean_branch_steps", mean_branch_steps},
          {"detour_probability", detour_probability},
          {"preference_spread", preference_spread},
          {"rho", rho},
          {"series_length", series_length},
          {"timeseries_fraction", timeseries_fraction},
          {"days", days},
          {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  try {
    c.n_users = j.value("n_users", c.n_users);
    c.n_reports = j.value("n_reports", c.n_reports);
    c.n_clusters = j.value("n_clusters", c.n_clusters);
    c.sessions_per_user = j.value("sessions_per_user", c.sessions_per_user);
    c.intents_per_user = j.value("intents_per_user", c.intents_per_user);
    c.hubs_per_user = j.value("hubs_per_user", c.hubs_per_user);
    c.branch_length = j.value("branch_length", c.branch_length);
    c.mean_branch_steps = j.value("mean_branch_steps", c.mean_branch_steps);
    c.detour_probability = j.value("detour_probability", c.detour_probability);
    c.preference_spread = j.value("preference_spread", c.preference_spread);
    c.rho = j.value("rho", c.rho);
    c.series_length = j.value("series_length", c.series_length);
    c.timeseries_fraction = j.value("timeseries_fraction", c.timeseries_fraction);
    c.days = j.value("days", c.days);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

double expected_session_length(const SynthConfig& c) {
  // Hub, then branch nodes until the early jump or the end of the chain,
  // then the intent; each branch visit may add one detour hit.
  const double stay = 1.0 - 1.0 / c.mean_branch_steps;
  double branch = 0.0;
  for (int k = 1; k <= c.branch_length; ++k) branch += std::pow(stay, k);
  return 2.0 + branch * (1.0 + c.detour_probability);
}

double expected_sessions_per_user(const SynthConfig& c) {
  double total = 0.0;
  for (int cl = 0; cl < c.n_clusters; ++cl) total += sessions_for_cluster(c, cl);
  return total / c.n_clusters;
}

SynthData generate_with_truth(const SynthConfig& config) {
  config.validate();
  SynthData data;
  const Timestamp horizon = static_cast<Timestamp>(config.days) * 86400;
  std::vector<ReportKind> kinds(config.n_reports);
  for (int r = 0; r < config.n_reports; ++r) kinds[r] = kind_of(r, config);

  for (int u = 0; u < config.n_users; ++u) {
    std::seed_seq seq{config.seed, static_cast<std::uint64_t>(u), std::uint64_t{0x5eed}};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SynthUser user;
    user.user_id = user_name(u);
    user.cluster = std::uniform_int_distribution<int>(0, config.n_clusters - 1)(rng);
    user.sessions = sessions_for_cluster(config, user.cluster);

    std::vector<int> pool(config.n_reports);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t next = 0;
    for (int h = 0; h < config.hubs_per_user; ++h) user.hubs.push_back(report_name(pool[next++]));
    for (int i = 0; i < config.intents_per_user; ++i) {
      const std::string intent = report_name(pool[next++]);
      user.intents.push_back(intent);
      auto& chain = user.branches[intent];
      for (int b = 0; b < config.branch_length; ++b) chain.push_back(report_name(pool[next++]));
    }
    std::vector<std::string> own(user.hubs);
    for (const auto& i : user.intents) {
      own.push_back(i);
      own.insert(own.end(), user.branches[i].begin(), user.branches[i].end());
    }

    // Intent preferences and each intent's signature (metric, element).
    std::vector<double> pref(config.intents_per_user);
    for (auto& p : pref) p = 1.0 - config.preference_spread + 2.0 * config.preference_spread * unif(rng);
    std::vector<int> pairs(kMetrics.size() * kElements.size());
    std::iota(pairs.begin(), pairs.end(), 0);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    std::uniform_int_distribution<int> any_pair(0, static_cast<int>(pairs.size()) - 1);
    std::uniform_int_distribution<std::size_t> any_own(0, own.size() - 1);
    std::uniform_int_distribution<std::size_t> any_hub(0, user.hubs.size() - 1);
    std::exponential_distribution<double> dwell(1.0 / kDwellMean);
    std::exponential_distribution<double> intent_dwell(1.0 / kIntentDwellMean);

    const Timestamp slot = horizon / user.sessions;
    std::vector<int> round;  // intents still to be pursued this round, next at the back
    for (int s = 0; s < user.sessions; ++s) {
      if (round.empty()) round = preference_order(pref, rng);
      const int k = round.back();
      round.pop_back();
      const std::string& intent = user.intents[k];
      const auto& chain = user.branches[intent];
      const int signature = pairs[k % pairs.size()];

      std::vector<std::string> walk{user.hubs[any_hub(rng)]};
      for (std::size_t b = 0; b < chain.size(); ++b) {
        if (unif(rng) < 1.0 / config.mean_branch_steps) break;
        walk.push_back(chain[b]);
        if (unif(rng) < config.detour_probability) walk.push_back(own[any_own(rng)]);
      }
      walk.push_back(intent);

      Timestamp t = s * slot + static_cast<Timestamp>(unif(rng) * 0.25 * slot);
      const std::string hint = user.user_id + "-s" + std::to_string(s);
      for (const auto& report : walk) {
        HitRecord h;
        h.user_id = user.user_id;
        h.timestamp = t;
        h.report_id = report;
        const int r = std::stoi(report.substr(1));
        h.kind = kinds[r];
        const int pair = unif(rng) < config.rho ? signature : pairs[any_pair(rng)];
        h.metric = kMetrics[pair / kElements.size()];
        h.dimension_element = kElements[pair % kElements.size()];
        const int len = h.kind == ReportKind::kTimeSeries ? config.series_length : 1;
        for (int i = 0; i < len; ++i) {
          const double signal = template_value(k, i, len) * (h.kind == ReportKind::kHistogram ? 4 : 1);
          const double noise = 2.0 + gauss(rng);
          h.values.push_back(config.rho * signal + (1.0 - config.rho) * noise);
        }
        h.session_hint = hint;
        data.hits.push_back(std::move(h));
        const double d = report == intent ? intent_dwell(rng) : dwell(rng);
        t += 1 + static_cast<Timestamp>(d);
      }
    }
    data.users.push_back(std::move(user));
  }
  return data;
}

std::vector<HitRecord> generate(const SynthConfig& config) {
  return generate_with_truth(config).hits;
}

}  // namespace intentrec
