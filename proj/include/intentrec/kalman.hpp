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

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace intentrec {

inline constexpr double kMissingVarianceScale = 1e6;
inline constexpr double kDefaultProcessNoise = 0.01;
inline constexpr double kMeasurementVarianceFloor = 1e-6;

// Linear-Gaussian model of one user's latent factor dynamics.
struct KalmanModel {
  Eigen::MatrixXd A;       // R x R transition
  Eigen::MatrixXd Q;       // R x R process noise
  Eigen::MatrixXd Lambda;  // N x R loading matrix
  Eigen::MatrixXd Psi;     // N x N measurement noise

  Eigen::Index rank() const { return A.rows(); }
  Eigen::Index observations() const { return Lambda.rows(); }
  void check() const;  // throws ArgumentError on inconsistent shapes
};

struct KalmanState {
  Eigen::VectorXd f_prior;  // f~_t
  Eigen::VectorXd f_post;   // f^_t
  Eigen::MatrixXd P_prior;  // P~_t
  Eigen::MatrixXd P_post;   // P^_t
  Eigen::MatrixXd gain;     // K_t, R x N

  static KalmanState initial(const Eigen::VectorXd& f0);  // P^_0 = I
};

// Ridge least squares for A in f_t = A f_{t-1}; F holds one factor per column.
Eigen::MatrixXd estimate_transition(const Eigen::MatrixXd& F, double ridge = 1e-6);

// Mean squared residual of X - Lambda F, floored at kMeasurementVarianceFloor.
double estimate_measurement_variance(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Lambda,
                                     const Eigen::MatrixXd& F);

// A from F, Q = q I, Psi = psi I with psi from the decomposition residual.
KalmanModel make_model(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Lambda,
                       const Eigen::MatrixXd& F, double q = kDefaultProcessNoise,
                       double ridge = 1e-6);

void predict(const KalmanModel& model, KalmanState& state);

// std::nullopt marks a missing observation: the measurement variance is
// inflated by kMissingVarianceScale and the residual is zero.
void update(const KalmanModel& model, KalmanState& state,
            const std::optional<Eigen::VectorXd>& x);

// One predict/update per observation starting from f0 and P^_0 = I.
// Returns f^_1 .. f^_T.
std::vector<Eigen::VectorXd> evolve_sequence(const KalmanModel& model, const Eigen::VectorXd& f0,
                                             const std::vector<std::optional<Eigen::VectorXd>>& xs,
                                             KalmanState* final_state = nullptr);

// Convenience overload over the columns of X, none missing.
std::vector<Eigen::VectorXd> evolve_sequence(const KalmanModel& model, const Eigen::VectorXd& f0,
                                             const Eigen::MatrixXd& X,
                                             KalmanState* final_state = nullptr);

}  // namespace intentrec
