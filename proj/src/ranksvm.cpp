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

#include "intentrec/ranksvm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "intentrec/error.hpp"

namespace intentrec {
namespace {

constexpr int kMinStepsPerEpoch = 100;
constexpr double kAveragingDecay = 3.0;

std::vector<double> project(const std::vector<Eigen::VectorXd>& fs, const Eigen::VectorXd& w) {
  std::vector<double> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(w.dot(f));
  return out;
}

void clip(Eigen::VectorXd& w) {
  const double n = w.norm();
  if (n > kMaxWeightNorm) w *= kMaxWeightNorm / n;
}

}  // namespace

std::optional<std::string> final_target(const Session& session, const NavGraph& graph) {
  for (auto it = session.hits.rbegin(); it != session.hits.rend(); ++it) {
    if (graph.contains(it->report_id) && graph.node(it->report_id).target) return it->report_id;
  }
  return std::nullopt;
}

std::map<std::string, RankTrainingSet> build_training_sets(
    const std::vector<LabeledSession>& sessions) {
  std::map<std::string, std::vector<Eigen::VectorXd>> by_target;
  for (const auto& s : sessions) {
    if (!s.target) continue;
    auto& bucket = by_target[*s.target];
    for (const auto& f : s.factors) {
      const double n = f.norm();
      if (n > 0.0 && std::isfinite(n)) bucket.push_back(f / n);
    }
  }
  std::map<std::string, RankTrainingSet> sets;
  for (const auto& [intent, pos] : by_target) {
    RankTrainingSet ts;
    ts.intent = intent;
    ts.positives = pos;
    for (const auto& [other, neg] : by_target) {
      if (other != intent) ts.negatives.insert(ts.negatives.end(), neg.begin(), neg.end());
    }
    sets.emplace(intent, std::move(ts));
  }
  return sets;
}

double rank_objective(const RankTrainingSet& ts, const Eigen::VectorXd& w, double lambda) {
  // Sum over pairs of max(0, 1 - a_i + b_j): sort b, then for each a_i sum
  // the b_j exceeding a_i - 1 via suffix sums.
  std::vector<double> b = project(ts.negatives, w);
  std::sort(b.begin(), b.end());
  std::vector<double> suffix(b.size() + 1, 0.0);
  for (std::size_t j = b.size(); j-- > 0;) suffix[j] = suffix[j + 1] + b[j];
  double hinge = 0.0;
  for (double a : project(ts.positives, w)) {
    const auto first = std::upper_bound(b.begin(), b.end(), a - 1.0) - b.begin();
    const double count = static_cast<double>(b.size() - first);
    hinge += count * (1.0 - a) + suffix[first];
  }
  return w.squaredNorm() + lambda * hinge;
}

double pairwise_violation_rate(const RankTrainingSet& ts, const Eigen::VectorXd& w) {
  if (ts.positives.empty() || ts.negatives.empty()) return 0.0;
  std::vector<double> b = project(ts.negatives, w);
  std::sort(b.begin(), b.end());
  double violated = 0.0;
  for (double a : project(ts.positives, w)) {
    violated += static_cast<double>(b.end() - std::lower_bound(b.begin(), b.end(), a));
  }
  return violated / (static_cast<double>(ts.positives.size()) * ts.negatives.size());
}

IntentModel train_intent(const RankTrainingSet& ts, const RankOptions& options) {
  if (options.lambda <= 0.0) throw ArgumentError("ranksvm: lambda must be > 0");
  if (options.epochs < 1) throw ArgumentError("ranksvm: epochs must be >= 1");
  IntentModel model;
  if (ts.positives.empty()) throw ArgumentError("ranksvm: intent " + ts.intent + " has no positives");
  const Eigen::Index R = ts.positives.front().size();

  if (ts.negatives.empty()) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(R);
    for (const auto& f : ts.positives) mean += f;
    const double n = mean.norm();
    model.w = n > 0.0 ? Eigen::VectorXd(mean / n) : mean;
    model.degenerate = true;
    model.objective = rank_objective(ts, model.w, options.lambda);
    return model;
  }

  const double pairs = static_cast<double>(ts.positives.size()) * ts.negatives.size();
  // ||w||^2 + lambda * sum hinge, divided by lambda |P|, is the regularized
  // mean hinge with mu / 2 = 1 / (lambda |P|).
  const double mu = 2.0 / (options.lambda * pairs);
  const auto steps = static_cast<long>(std::clamp<double>(
      pairs, std::min(kMinStepsPerEpoch, options.max_steps_per_epoch),
      static_cast<double>(std::max(1, options.max_steps_per_epoch))));

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick_pos(0, ts.positives.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_neg(0, ts.negatives.size() - 1);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(R);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(R);
  long t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (long s = 0; s < steps; ++s) {
      ++t;
      const Eigen::VectorXd& fi = ts.positives[pick_pos(rng)];
      const Eigen::VectorXd& fj = ts.negatives[pick_neg(rng)];
      const double eta = 1.0 / (mu * static_cast<double>(t));
      const bool active = w.dot(fi - fj) < 1.0;
      w *= 1.0 - eta * mu;
      if (active) w += eta * (fi - fj);
      clip(w);
      // Polynomial-decay averaging, weight (c + 1) / (t + c) on the newest iterate.
      avg += (w - avg) * (kAveragingDecay + 1.0) / (static_cast<double>(t) + kAveragingDecay);
    }
    model.objective_trace.push_back(rank_objective(ts, avg, options.lambda) /
                                    (options.lambda * pairs));
  }
  model.w = avg;
  clip(model.w);
  model.violation_rate = pairwise_violation_rate(ts, model.w);
  model.objective = rank_objective(ts, model.w, options.lambda);
  return model;
}

double score_from_margin(double margin) {
  return std::clamp((kMaxWeightNorm + margin) / (2.0 * kMaxWeightNorm), 0.0, 1.0);
}

double RankModel::intent_score(const std::string& intent, const Eigen::VectorXd& f) const {
  auto it = intents.find(intent);
  if (it == intents.end()) throw LookupError("ranksvm: unknown intent " + intent);
  const double n = f.norm();
  if (!(n > 0.0)) return score_from_margin(0.0);
  if (f.size() != it->second.w.size()) throw ArgumentError("ranksvm: factor size mismatch");
  return score_from_margin(it->second.w.dot(f) / n);
}

std::map<std::string, double> RankModel::intent_scores(const Eigen::VectorXd& f) const {
  std::map<std::string, double> out;
  for (const auto& [intent, m] : intents) out[intent] = intent_score(intent, f);
  return out;
}

nlohmann::json RankModel::to_json() const {
  nlohmann::json j;
  j["lambda"] = lambda;
  nlohmann::json items = nlohmann::json::object();
  for (const auto& [intent, m] : intents) {
    nlohmann::json e;
    e["w"] = std::vector<double>(m.w.data(), m.w.data() + m.w.size());
    e["degenerate"] = m.degenerate;
    e["violation_rate"] = m.violation_rate;
    e["objective"] = m.objective;
    items[intent] = std::move(e);
  }
  j["intents"] = std::move(items);
  return j;
}

RankModel RankModel::from_json(const nlohmann::json& j) {
  RankModel model;
  try {
    model.lambda = j.at("lambda").get<double>();
    for (const auto& [intent, e] : j.at("intents").items()) {
      IntentModel m;
      const auto w = e.at("w").get<std::vector<double>>();
      m.w = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      m.degenerate = e.at("degenerate").get<bool>();
      m.violation_rate = e.at("violation_rate").get<double>();
      m.objective = e.at("objective").get<double>();
      model.intents.emplace(intent, std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("rank model: ") + e.what());
  }
  return model;
}

RankModel train_rank_model(const std::vector<LabeledSession>& sessions,
                           const RankOptions& options) {
  RankModel model;
  model.lambda = options.lambda;
  std::uint64_t k = 0;
  for (const auto& [intent, ts] : build_training_sets(sessions)) {
    if (ts.positives.empty()) continue;
    RankOptions o = options;
    o.seed = options.seed * 1000003ULL + k++;
    model.intents.emplace(intent, train_intent(ts, o));
  }
  return model;
}

}  // namespace intentrec
