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
#include "intentrec/parafac2.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "intentrec/error.hpp"
#include "intentrec/matrix_io.hpp"

namespace intentrec {
namespace {

constexpr int kExtrapolationTries = 6;
// Squared residual, relative to the data, treated as an exact fit.
constexpr double kExactFit = 1e-26;

// Minimum-norm solution of Z * A = B for symmetric positive semidefinite A.
Eigen::MatrixXd right_solve(const Eigen::MatrixXd& B, const Eigen::MatrixXd& A) {
  return A.completeOrthogonalDecomposition().solve(B.transpose()).transpose();
}

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) M(r, c) = unif(rng);
  }
  return M;
}

void validate(const std::vector<Eigen::MatrixXd>& slices, int rank) {
  if (slices.empty()) throw ArgumentError("decompose: tensor has no slices");
  if (rank < 1) throw ArgumentError("decompose: rank must be >= 1");
  const Eigen::Index T = slices.front().cols();
  Eigen::Index min_rows = slices.front().rows();
  for (const auto& X : slices) {
    if (X.cols() != T) throw ArgumentError("decompose: slices differ in column count");
    min_rows = std::min(min_rows, X.rows());
    if (!X.allFinite()) throw DataError("decompose: tensor contains NaN or infinite values");
  }
  if (rank > T || rank > min_rows) {
    throw ArgumentError("decompose: rank " + std::to_string(rank) + " exceeds min(T=" +
                        std::to_string(T) + ", min N_u=" + std::to_string(min_rows) + ")");
  }
}

// Sets every G_u to the polar factor of X_u V S_u H^T and returns the fit error.
double fit_g_and_error(const std::vector<Eigen::MatrixXd>& slices, Parafac2Factors& f) {
  double err = 0.0;
  const Eigen::MatrixXd Vt = f.V.transpose();
  for (std::size_t u = 0; u < slices.size(); ++u) {
    Eigen::MatrixXd core = f.H * f.S[u].asDiagonal();
    Eigen::MatrixXd M = slices[u] * f.V * core.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    f.G[u] = svd.matrixU() * svd.matrixV().transpose();
    err += (slices[u] - f.G[u] * (core * Vt)).squaredNorm();
  }
  return err;
}

// One ALS sweep: G_u, then H, V and S_u on the projected slices.
double als_sweep(const std::vector<Eigen::MatrixXd>& slices, Parafac2Factors& f) {
  const std::size_t U = slices.size();
  const Eigen::Index R = f.rank;
  const Eigen::Index T = f.V.rows();
  std::vector<Eigen::MatrixXd> Y(U);
  for (std::size_t u = 0; u < U; ++u) {
    Eigen::MatrixXd M = slices[u] * f.V * f.S[u].asDiagonal() * f.H.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    f.G[u] = svd.matrixU() * svd.matrixV().transpose();
    Y[u] = f.G[u].transpose() * slices[u];
  }

  Eigen::MatrixXd CtC = Eigen::MatrixXd::Zero(R, R);
  for (const auto& s : f.S) CtC += s * s.transpose();

  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(R, R);
  for (std::size_t u = 0; u < U; ++u) num += Y[u] * f.V * f.S[u].asDiagonal();
  f.H = right_solve(num, (f.V.transpose() * f.V).cwiseProduct(CtC));

  Eigen::MatrixXd numV = Eigen::MatrixXd::Zero(T, R);
  for (std::size_t u = 0; u < U; ++u) numV += Y[u].transpose() * f.H * f.S[u].asDiagonal();
  f.V = right_solve(numV, (f.H.transpose() * f.H).cwiseProduct(CtC));

  Eigen::MatrixXd gram = (f.H.transpose() * f.H).cwiseProduct(f.V.transpose() * f.V);
  auto gram_dec = gram.completeOrthogonalDecomposition();
  for (std::size_t u = 0; u < U; ++u) {
    Eigen::VectorXd rhs = (f.H.transpose() * Y[u] * f.V).diagonal();
    f.S[u] = gram_dec.solve(rhs);
  }

  double err = 0.0;
  const Eigen::MatrixXd Vt = f.V.transpose();
  for (std::size_t u = 0; u < U; ++u) {
    err += (slices[u] - f.G[u] * (f.H * f.S[u].asDiagonal() * Vt)).squaredNorm();
  }
  return err;
}

}  // namespace

Eigen::MatrixXd Parafac2Factors::loading_matrix(std::size_t user) const {
  if (user >= G.size()) throw LookupError("parafac2: user index out of range");
  return G[user] * H * S[user].asDiagonal();
}

Eigen::MatrixXd Parafac2Factors::reconstruct(std::size_t user) const {
  return loading_matrix(user) * V.transpose();
}

Parafac2Result decompose(const std::vector<Eigen::MatrixXd>& slices,
                         const Parafac2Options& options) {
  validate(slices, options.rank);
  if (options.max_iters < 1) throw ArgumentError("decompose: max_iters must be >= 1");
  const Eigen::Index R = options.rank;
  const Eigen::Index T = slices.front().cols();
  const std::size_t U = slices.size();

  double norm2 = 0.0;
  for (const auto& X : slices) norm2 += X.squaredNorm();

  std::mt19937_64 rng(options.seed);
  auto random_start = [&]() {
    Parafac2Factors f;
    f.rank = options.rank;
    f.H = uniform_matrix(R, R, rng);
    f.V = uniform_matrix(T, R, rng);
    // One shared draw keeps the start point independent of user order.
    const Eigen::VectorXd s0 = uniform_matrix(R, 1, rng).col(0);
    f.S.assign(U, s0);
    f.G.resize(U);
    return f;
  };

  // Leading right singular vectors of the stacked slices, H = I, S_u = 1.
  auto svd_start = [&]() {
    Parafac2Factors f;
    f.rank = options.rank;
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(T, T);
    for (const auto& X : slices) cross += X.transpose() * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cross);
    f.V = eig.eigenvectors().rightCols(R).rowwise().reverse();
    f.H = Eigen::MatrixXd::Identity(R, R);
    f.S.assign(U, Eigen::VectorXd::Ones(R));
    f.G.resize(U);
    return f;
  };

  auto run = [&](Parafac2Factors f) {
    Parafac2Result result;
    double prev = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= options.max_iters; ++iter) {
      Parafac2Factors before = f;
      double err = als_sweep(slices, f);
      if (options.line_search && iter >= 3) {
        Parafac2Factors best;
        bool improved = false;
        // Extrapolate along the sweep's step; kept only when it fits better.
        double step = std::cbrt(static_cast<double>(iter));
        for (int k = 0; k < kExtrapolationTries; ++k, step *= 2.0) {
          Parafac2Factors cand = before;
          cand.H += step * (f.H - before.H);
          cand.V += step * (f.V - before.V);
          for (std::size_t u = 0; u < U; ++u) cand.S[u] += step * (f.S[u] - before.S[u]);
          double cand_err = fit_g_and_error(slices, cand);
          if (cand_err >= err) break;
          best = std::move(cand);
          err = cand_err;
          improved = true;
        }
        if (improved) f = std::move(best);
      }
      result.report.errors.push_back(err);
      if (err <= kExactFit * norm2 || prev - err < options.tol * prev) {
        result.report.converged = true;
        break;
      }
      prev = err;
    }
    result.report.iterations = static_cast<int>(result.report.errors.size());
    result.factors = std::move(f);
    return result;
  };

  // Independent starts; the best final fit wins.
  const int starts = std::max(1, options.starts);
  Parafac2Result result;
  for (int s = 0; s < starts; ++s) {
    Parafac2Result cand = run((options.svd_start && s == 0) ? svd_start() : random_start());
    if (s == 0 || cand.report.errors.back() < result.report.errors.back()) {
      result = std::move(cand);
    }
    if (result.report.errors.back() <= kExactFit * norm2) break;
  }

  // Unit-norm columns of V; the scale moves into every S_u.
  auto& f = result.factors;
  for (Eigen::Index r = 0; r < R; ++r) {
    const double n = f.V.col(r).norm();
    if (n > 0.0) {
      f.V.col(r) /= n;
      for (auto& s : f.S) s(r) *= n;
    }
  }
  return result;

}

Parafac2Result decompose(const ContextTensor& tensor, const Parafac2Options& options) {
  return decompose(tensor.slices, options);
}

double relative_reconstruction_error(const std::vector<Eigen::MatrixXd>& slices,
                                     const Parafac2Factors& factors) {
  double num = 0.0, den = 0.0;
  for (std::size_t u = 0; u < slices.size(); ++u) {
    num += (slices[u] - factors.reconstruct(u)).squaredNorm();
    den += slices[u].squaredNorm();
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

void save_factors(const std::filesystem::path& dir, const std::vector<std::string>& users,
                  const Parafac2Result& result, std::uint64_t seed) {
  const auto& f = result.factors;
  if (users.size() != f.users()) throw ArgumentError("save_factors: user list size mismatch");
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "V.csv", f.V);
  write_matrix_csv(dir / "H.csv", f.H);
  for (std::size_t u = 0; u < users.size(); ++u) {
    const std::string stem = safe_file_stem(users[u]);
    write_matrix_csv(dir / ("G_" + stem + ".csv"), f.G[u]);
    write_matrix_csv(dir / ("S_" + stem + ".csv"), f.S[u]);
  }
  nlohmann::json fit;
  fit["rank"] = f.rank;
  fit["seed"] = seed;
  fit["users"] = users;
  fit["iterations"] = result.report.iterations;
  fit["converged"] = result.report.converged;
  fit["errors"] = result.report.errors;
  std::ofstream out(dir / "fit.json");
  if (!out) throw IoError("cannot write " + (dir / "fit.json").string());
  out << fit.dump(2) << '\n';
}

Parafac2Result load_factors(const std::filesystem::path& dir, const std::vector<std::string>& users) {
  std::ifstream in(dir / "fit.json");
  if (!in) throw IoError("cannot read " + (dir / "fit.json").string());
  nlohmann::json fit = nlohmann::json::parse(in);
  Parafac2Result result;
  auto& f = result.factors;
  f.rank = fit.at("rank").get<int>();
  result.report.iterations = fit.at("iterations").get<int>();
  result.report.converged = fit.at("converged").get<bool>();
  result.report.errors = fit.at("errors").get<std::vector<double>>();
  f.V = read_matrix_csv(dir / "V.csv");
  f.H = read_matrix_csv(dir / "H.csv");
  for (const auto& user : users) {
    const std::string stem = safe_file_stem(user);
    f.G.push_back(read_matrix_csv(dir / ("G_" + stem + ".csv")));
    f.S.push_back(read_matrix_csv(dir / ("S_" + stem + ".csv")).col(0));
  }
  return result;
}

}  // namespace intentrec
