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
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "intentrec/context.hpp"

namespace intentrec {

struct Parafac2Options {
  int rank = 5;
  double tol = 1e-7;  // relative change of the fit error
  int max_iters = 500;
  std::uint64_t seed = 0;
  int starts = 6;  // independent fits, best final error kept
  bool line_search = true;
  bool svd_start = true;  // first start from the leading singular vectors
};

// X_u ~ G_u * H * diag(S_u) * V^T for every slice u.
struct Parafac2Factors {
  int rank = 0;
  std::vector<Eigen::MatrixXd> G;  // N_u x R, orthonormal columns
  Eigen::MatrixXd H;               // R x R
  std::vector<Eigen::VectorXd> S;  // diagonal of S_u
  Eigen::MatrixXd V;               // T x R

  std::size_t users() const { return G.size(); }
  // G_u * H * S_u; throws LookupError for a bad index.
  Eigen::MatrixXd loading_matrix(std::size_t user) const;
  Eigen::MatrixXd reconstruct(std::size_t user) const;
  // V^T, shared by every user.
  Eigen::MatrixXd initial_latent_factors() const { return V.transpose(); }
};

struct FitReport {
  int iterations = 0;
  std::vector<double> errors;  // sum_u ||X_u - G_u H S_u V^T||_F^2 after each sweep
  bool converged = false;
};

struct Parafac2Result {
  Parafac2Factors factors;
  FitReport report;
};

// Direct-fitting PARAFAC2 by alternating least squares. Each sweep sets
// every G_u to the orthonormal polar factor of X_u V S_u H^T, then performs
// one CP-ALS round (H, V, then S_u) on the projected slices G_u^T X_u.
Parafac2Result decompose(const std::vector<Eigen::MatrixXd>& slices,
                         const Parafac2Options& options);
Parafac2Result decompose(const ContextTensor& tensor, const Parafac2Options& options);

double relative_reconstruction_error(const std::vector<Eigen::MatrixXd>& slices,
                                     const Parafac2Factors& factors);

// Directory layout: V.csv, H.csv, G_<stem>.csv, S_<stem>.csv and fit.json.
void save_factors(const std::filesystem::path& dir, const std::vector<std::string>& users,
                  const Parafac2Result& result, std::uint64_t seed);
Parafac2Result load_factors(const std::filesystem::path& dir, const std::vector<std::string>& users);

}  // namespace intentrec
