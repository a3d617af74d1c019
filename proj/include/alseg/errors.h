// Copyright 2026 The Authors.
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

#ifndef ALSEG_ERRORS_H_
#define ALSEG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace alseg {

// Invalid configuration or arguments (bad arch, h <= 0, q > |U|, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Tensor shape mismatch.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file (bad magic, truncated payload, bad JSON).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values produced during optimization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown id in a lookup table.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Operation inconsistent with current pool state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Not enough usable samples for a statistical test.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace alseg

#endif  // ALSEG_ERRORS_H_
