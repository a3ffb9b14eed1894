// Copyright 2026 The POIR Authors
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

#ifndef POIR_ERRORS_HPP_
#define POIR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace poir {

// config/usage problems (bad field values, unknown names) -> exit code 2
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// file problems (missing path, malformed line) -> exit code 3
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// numeric failures (divergence, all rollouts non-finite) -> exit code 4
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// API contract violations (dimension mismatch, bad indices) throw
// std::invalid_argument directly.

}  // namespace poir

#endif  // POIR_ERRORS_HPP_
