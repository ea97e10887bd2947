// Copyright 2026-present the rsaa authors
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

namespace rsaa {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or configuration value outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input files / configs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: overflow, non-convergence, budget exhaustion.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Floating-point range exceeded while evaluating a conjugate.
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A piecewise-linear goal hit zero or several active regions.
class PartitionViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A located inner minimizer escaped its localization interval.
class LocalizationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The requested analysis is not valid for this problem (e.g. CLT with
/// several minimizers).
class Refusal : public Error {
 public:
  using Error::Error;
};

}  // namespace rsaa
