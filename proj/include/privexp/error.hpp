// Copyright 2026 The privexp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVEXP_ERROR_HPP_
#define PRIVEXP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace privexp {

// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind {
  kInvalidInput = 2,
  kInfeasible = 3,
  kResourceCap = 4,
  kNonConvergence = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorKind::kInvalidInput, what) {}
};

class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

class ResourceCapExceeded : public Error {
 public:
  explicit ResourceCapExceeded(const std::string& what)
      : Error(ErrorKind::kResourceCap, what) {}
};

namespace internal {

inline void Require(bool condition, const std::string& what) {
  if (!condition) throw InvalidInput(what);
}

}  // namespace internal
}  // namespace privexp

#endif  // PRIVEXP_ERROR_HPP_
