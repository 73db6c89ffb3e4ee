// Copyright 2026 The socdil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOCDIL_ERRORS_H_
#define SOCDIL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace socdil {

// Bad arguments to a library call (out-of-range proposal, k < 2, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Incompatible or unresolvable configuration: wrong environment for a
// policy, unknown config key, unsupported builtin. The CLI maps this to
// exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A broken internal contract, e.g. a policy emitting a distribution that
// does not sum to one.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A training step produced a non-finite advantage or gradient. The CLI
// maps this to exit code 3.
class StepAborted : public std::runtime_error {
 public:
  StepAborted(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace socdil

#endif  // SOCDIL_ERRORS_H_
