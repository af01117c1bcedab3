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

#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace intentrec {

// Dense matrix text format: a header line "rows,cols" followed by `rows`
// lines of comma-separated values in row-major order, printed with 17
// significant digits so a write/read cycle is lossless.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

// File-name-safe rendering of an opaque id.
std::string safe_file_stem(const std::string& id);

}  // namespace intentrec
