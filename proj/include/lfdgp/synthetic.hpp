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
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lfdgp/domain.hpp"

namespace lfdgp {

// Generators:
//   mixed3     y(t, s, u) on t in [0,1], s in {1..5}, u in {lin, sin, dsin}; grid = {t, s, u} counts.
//   damped     sin(pi(4t - 1/4)) e^{-3t} / (1 + e^{-5t}) + N(0, noise); grid = {n}, `replicates` per time.
//   regimes    damped mean with noise std 0.01 below t = 0.5 and 0.1 above; grid = {n}.
//   letters    x/y pen paths of letters A-D at sizes 2..6 with per-replicate timing variation,
//              unaligned and of varying length; grid = {nominal samples per demonstration}.
struct SyntheticSpec {
  std::string generator = "mixed3";
  std::vector<std::size_t> grid;
  std::size_t replicates = 1;
  double noise = 0.0;  // variance
  std::uint64_t seed = 0;
};

double mixed3(double t, std::int64_t s, const std::string& u);
double damped_mean(double t);

TaskSchema mixed3_schema();
TaskSchema time_only_schema();
TaskSchema letters_schema();

/// Throws UsageError for unknown generators or grids outside the generator domain.
DemonstrationSet gen_synthetic(const SyntheticSpec& spec);

struct R2Report {
  std::vector<double> per_output;
  double pooled = 0.0;
};

/// R^2 = 1 - SS_res / SS_tot per column, pooled by summing both sums over outputs.
/// Throws DegenerateError when the test outputs have zero variance.
R2Report evaluate_r2(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& predicted);

}  // namespace lfdgp
