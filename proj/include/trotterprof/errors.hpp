// Copyright 2026 The trotterprof Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace trotterprof {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands disagree on qubit count or matrix dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A dense realization would exceed the configured qubit cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Input that cannot be normalized or is otherwise degenerate (zero vectors,
/// duplicate grid points, underflowing deviations).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class NotHermitianError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument to an operation (unknown names, bad indices, bad variant).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Numerical failures. The CLI maps every NumericalError to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularFitError : public NumericalError {
 public:
  SingularFitError(const std::string& what, double condition_number)
      : NumericalError(what), condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

class CalibrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ExtractionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed or semantically invalid configuration document. Maps to exit 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace trotterprof
