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
#include "intentrec/matrix_io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "intentrec/error.hpp"

namespace intentrec {

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << M.rows() << ',' << M.cols() << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", M(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  long rows = -1, cols = -1;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "%ld,%ld", &rows, &cols) != 2 ||
      rows < 0 || cols < 0) {
    throw FormatError("bad matrix header in " + path.string());
  }
  Eigen::MatrixXd M(rows, cols);
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw FormatError("truncated matrix file " + path.string());
    std::stringstream ss(line);
    std::string cell;
    for (long c = 0; c < cols; ++c) {
      if (!std::getline(ss, cell, ',')) throw FormatError("short row in " + path.string());
      char* end = nullptr;
      M(r, c) = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw FormatError("non-numeric cell in " + path.string());
    }
  }
  return M;
}

std::string safe_file_stem(const std::string& id) {
  std::string out;
  for (unsigned char c : id) {
    bool ok = std::isalnum(c) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? static_cast<char>(c) : '_');
  }
  return out.empty() ? "_" : out;
}

}  // namespace intentrec
