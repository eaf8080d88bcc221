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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace lfdgp {

enum class OptMethod { simplex, quasi_newton };

const char* to_string(OptMethod m);
OptMethod opt_method_from_string(const std::string& name);

struct OptControl {
  std::size_t n_starts = 8;
  std::size_t max_evals = 500;  // per start
  std::uint64_t seed = 0;
  double tol = 1e-6;
  std::vector<double> lower;
  std::vector<double> upper;
  OptMethod method = OptMethod::simplex;
  std::size_t threads = 1;
};

struct StartRecord {
  std::size_t start = 0;
  std::vector<double> initial;
  std::vector<double> theta;
  double value = 0.0;
  std::size_t evaluations = 0;
};

struct OptResult {
  std::vector<double> theta;
  double value = 0.0;
  std::vector<StartRecord> trace;
  std::size_t evaluations = 0;
};

/// Maximized objective. Non-finite values (or thrown lfdgp::Error) count as infeasible.
using Objective = std::function<double(std::span<const double>)>;

/// Multi-start bounded maximization. Starts are Latin-hypercube draws over the
/// bounds; any start whose objective is not finite is redrawn up to 10 times.
/// The result is deterministic given the seed, independent of `threads`.
/// Throws NumericalError when no start has a finite objective.
OptResult optimize(const Objective& objective, const OptControl& control);

/// n points in the box, one per stratum along each axis.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::span<const double> lower,
                                                 std::span<const double> upper, std::mt19937_64& rng);

/// Central-difference gradient with step h * max(1, |theta_i|), one-sided at the bounds.
std::vector<double> fd_gradient(const Objective& objective, std::span<const double> theta,
                                std::span<const double> lower, std::span<const double> upper, double h = 1e-6);

}  // namespace lfdgp
