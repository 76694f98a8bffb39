// Copyright 2026 The QA3C Authors
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

namespace qa3c {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    Success = 0,
    Validation = 1,
    Data = 2,
    Internal = 3,
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual ExitCode exit_code() const noexcept = 0;
};

/// Invalid configuration. Carries the offending key path.
class ConfigError : public Error {
  public:
    ConfigError(std::string field, const std::string &what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    [[nodiscard]] const std::string &field() const noexcept { return field_; }
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Validation;
    }

  private:
    std::string field_;
};

class IncompatibleCheckpointError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Validation;
    }
};

class DataError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Data;
    }
};

/// Malformed input file; `line` is 1-based, 0 when not line-specific.
class ParseError : public DataError {
  public:
    ParseError(const std::string &source, std::size_t line,
               const std::string &what)
        : DataError(source + ":" + std::to_string(line) + ": " + what),
          line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Well-formed input that breaks a domain invariant (non-positive price,
/// duplicate cell, ...).
class DataValidationError : public DataError {
  public:
    using DataError::DataError;
};

class InsufficientDataError : public DataError {
  public:
    using DataError::DataError;
};

class EmptyUniverseError : public DataError {
  public:
    using DataError::DataError;
};

class InfeasibleClusteringError : public DataError {
  public:
    using DataError::DataError;
};

/// A caller broke a function precondition.
class ContractViolation : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Internal;
    }
};

class EncodingDomainError : public ContractViolation {
  public:
    using ContractViolation::ContractViolation;
};

class InternalError : public Error {
  public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override {
        return ExitCode::Internal;
    }
};

/// Non-finite loss or gradient during training.
class TrainingDivergedError : public InternalError {
  public:
    using InternalError::InternalError;
};

} // namespace qa3c
