// Copyright 2026 The UBCL Authors. All rights reserved.
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

#ifndef UBCL_ERRORS_HPP_
#define UBCL_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace ubcl {

// Base for every error raised by the library. The CLI maps subclasses onto
// process exit codes (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration. Carries every violated invariant, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  explicit ConfigError(const std::string& what)
      : ConfigError(std::vector<std::string>{what}) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

// Episode lifecycle misuse, e.g. stepping a finished episode.
class LifecycleError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (mismatched lengths, bad shapes).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Mathematically undefined input, e.g. a zero-magnitude target.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite network output or loss.
class NumericFault : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint written by another format version or network shape.
class IncompatibleCheckpoint : public IoError {
 public:
  using IoError::IoError;
};

// Malformed text input (targets, overrides). `position` is a 0-based
// character offset into the offending string.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ConfigError(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace exit_codes {
inline constexpr int kOk = 0;
inline constexpr int kGeneric = 1;
inline constexpr int kConfig = 2;
inline constexpr int kIo = 3;
inline constexpr int kNumeric = 4;
inline constexpr int kInterrupted = 130;
}  // namespace exit_codes

inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return exit_codes::kConfig;
  if (dynamic_cast<const IoError*>(&e)) return exit_codes::kIo;
  if (dynamic_cast<const NumericFault*>(&e)) return exit_codes::kNumeric;
  return exit_codes::kGeneric;
}

}  // namespace ubcl

#endif  // UBCL_ERRORS_HPP_
