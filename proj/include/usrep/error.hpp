// Copyright (c) 2026 The usrep Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace usrep {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Bad configuration: invalid regex, unknown prompt type, bad delimiter set.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inputs that cannot be compared (language mismatch, unaligned ids).
class IncomparableError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by a caller-supplied value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A report could not be translated because some fragments lack an
/// approved/edited table entry.
class UnresolvedFragmentsError : public Error {
 public:
  explicit UnresolvedFragmentsError(std::vector<std::string> fragments)
      : Error(Describe(fragments)), fragments_(std::move(fragments)) {}
  const std::vector<std::string>& fragments() const noexcept {
    return fragments_;
  }

 private:
  static std::string Describe(const std::vector<std::string>& fragments) {
    std::string msg = "unresolved fragments:";
    for (const auto& f : fragments) msg += " [" + f + "]";
    return msg;
  }
  std::vector<std::string> fragments_;
};

}  // namespace usrep
