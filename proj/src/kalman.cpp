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

#include "intentrec/kalman.hpp"

#include <spdlog/spdlog.h>

#include "intentrec/error.hpp"

namespace intentrec {

void KalmanModel::check() const {
  const Eigen::Index R = A.rows();
  const Eigen::Index N = Lambda.rows();
  if (A.cols() != R || Q.rows() != R || Q.cols() != R) {
    throw ArgumentError("kalman: A and Q must be R x R");
  }
  if (Lambda.cols() != R) throw ArgumentError("kalman: loading matrix must have R columns");
  if (Psi.rows() != N || Psi.cols() != N) throw ArgumentError("kalman: Psi must be N x N");
}

KalmanState KalmanState::initial(const Eigen::VectorXd& f0) {
  KalmanState s;
  s.f_post = f0;
  s.P_post = Eigen::MatrixXd::Identity(f0.size(), f0.size());
  return s;
}

Eigen::MatrixXd estimate_transition(const Eigen::MatrixXd& F, double ridge) {
  if (F.cols() < 2) throw ArgumentError("estimate_transition: need at least two factors");
  if (ridge < 0.0) throw ArgumentError("estimate_transition: ridge must be >= 0");
  const Eigen::Index T = F.cols();
  const Eigen::MatrixXd prev = F.leftCols(T - 1);
  const Eigen::MatrixXd next = F.rightCols(T - 1);
  Eigen::MatrixXd gram = prev * prev.transpose();
  gram.diagonal().array() += ridge;
  const Eigen::MatrixXd cross = next * prev.transpose();
  // A = cross * gram^-1; gram is symmetric.
  return gram.completeOrthogonalDecomposition().solve(cross.transpose()).transpose();
}

double estimate_measurement_variance(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Lambda,
                                     const Eigen::MatrixXd& F) {
  if (X.size() == 0) return kMeasurementVarianceFloor;
  const double mse = (X - Lambda * F).squaredNorm() / static_cast<double>(X.size());
  return std::max(mse, kMeasurementVarianceFloor);
}

KalmanModel make_model(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Lambda,
                       const Eigen::MatrixXd& F, double q, double ridge) {
  KalmanModel m;
  const Eigen::Index R = Lambda.cols();
  const Eigen::Index N = Lambda.rows();
  m.A = estimate_transition(F, ridge);
  m.Q = q * Eigen::MatrixXd::Identity(R, R);
  m.Lambda = Lambda;
  m.Psi = estimate_measurement_variance(X, Lambda, F) * Eigen::MatrixXd::Identity(N, N);
  m.check();
  return m;
}

void predict(const KalmanModel& model, KalmanState& state) {
  state.f_prior = model.A * state.f_post;
  state.P_prior = model.A * state.P_post * model.A.transpose() + model.Q;
  state.P_prior = 0.5 * (state.P_prior + state.P_prior.transpose());
}

void update(const KalmanModel& model, KalmanState& state,
            const std::optional<Eigen::VectorXd>& x) {
  const Eigen::MatrixXd& L = model.Lambda;
  if (x && x->size() != L.rows()) throw ArgumentError("kalman: observation size mismatch");
  const Eigen::Index R = L.cols();

  Eigen::MatrixXd innovation = L * state.P_prior * L.transpose();
  innovation += x ? model.Psi : Eigen::MatrixXd(kMissingVarianceScale * model.Psi);
  innovation = 0.5 * (innovation + innovation.transpose());

  Eigen::LDLT<Eigen::MatrixXd> ldlt(innovation);
  const double scale = std::max(1.0, innovation.diagonal().cwiseAbs().maxCoeff());
  const double min_pivot = ldlt.info() == Eigen::Success
                               ? ldlt.vectorD().cwiseAbs().minCoeff()
                               : 0.0;
  if (ldlt.info() != Eigen::Success || min_pivot <= 1e-14 * scale) {
    spdlog::warn("kalman: innovation matrix is numerically singular; adding 1e-10 I");
    innovation.diagonal().array() += 1e-10;
    ldlt.compute(innovation);
  }

  // K = P~ L^T S^-1, computed as (S^-1 L P~)^T since S and P~ are symmetric.
  state.gain = ldlt.solve(L * state.P_prior).transpose();
  if (x) {
    state.f_post = state.f_prior + state.gain * (*x - L * state.f_prior);
  } else {
    state.f_post = state.f_prior;
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(R, R);
  state.P_post = (I - state.gain * L) * state.P_prior;
  state.P_post = 0.5 * (state.P_post + state.P_post.transpose());
}

std::vector<Eigen::VectorXd> evolve_sequence(const KalmanModel& model, const Eigen::VectorXd& f0,
                                             const std::vector<std::optional<Eigen::VectorXd>>& xs,
                                             KalmanState* final_state) {
  model.check();
  if (f0.size() != model.rank()) throw ArgumentError("kalman: initial factor size mismatch");
  KalmanState state = KalmanState::initial(f0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    predict(model, state);
    update(model, state, x);
    out.push_back(state.f_post);
  }
  if (final_state) *final_state = state;
  return out;
}

std::vector<Eigen::VectorXd> evolve_sequence(const KalmanModel& model, const Eigen::VectorXd& f0,
                                             const Eigen::MatrixXd& X, KalmanState* final_state) {
  if (X.rows() != model.observations()) throw ArgumentError("kalman: observation rows mismatch");
  std::vector<std::optional<Eigen::VectorXd>> xs;
  xs.reserve(X.cols());
  for (Eigen::Index t = 0; t < X.cols(); ++t) xs.emplace_back(X.col(t));
  return evolve_sequence(model, f0, xs, final_state);
}

}  // namespace intentrec
