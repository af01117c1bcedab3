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

#include <stdexcept>
#include <string>

namespace intentrec {

// Bad caller input: out-of-range parameters, shape mismatches.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot be processed (NaN, malformed content).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input stream does not conform to its declared format.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// Unknown key: node, user, intent.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pipeline stage was invoked before its predecessor produced `missing`.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& missing)
      : std::runtime_error("stage '" + stage + "' requires missing artifact: " + missing),
        missing_(missing) {}
  const std::string& missing() const { return missing_; }

 private:
  std::string missing_;
};

}  // namespace intentrec
