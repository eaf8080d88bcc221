/*
 * Copyright 2026 The lfdgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lfdgp {

enum class ErrorKind {
  usage,
  schema,
  data,
  degenerate,
  infeasible,
  numerical,
  io,
};

const char* to_string(ErrorKind kind);

// Process exit code for a given error class: 2 usage, 3 data, 4 numerical.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ErrorKind::schema, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Trajectory or dataset with no usable spread (zero path length, zero variance).
class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what) : Error(ErrorKind::degenerate, what) {}
};

class InfeasibleParameterError : public Error {
 public:
  explicit InfeasibleParameterError(const std::string& what) : Error(ErrorKind::infeasible, what) {}
};

/// Factorization failure after jitter escalation; carries the hyperparameters that failed.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::vector<double> theta = {})
      : Error(ErrorKind::numerical, what), theta_(std::move(theta)) {}
  const std::vector<double>& theta() const noexcept { return theta_; }

 private:
  std::vector<double> theta_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

}  // namespace lfdgp
