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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lfdgp/domain.hpp"

namespace lfdgp {

/// Task Completion Index: cumulative Euclidean path length over all outputs,
/// normalized to end at exactly 1 (first entry 0). Throws DegenerateError on
/// zero total length.
std::vector<double> compute_tci(const Demonstration& d);

using WarpPath = std::vector<std::pair<std::size_t, std::size_t>>;  // (reference index, demo index)

struct DtwResult {
  double cost = 0.0;
  WarpPath path;
};

/// Optimal monotone alignment of two TCI sequences with steps (1,0), (0,1), (1,1)
/// and local cost |ref[k] - other[l]|. Ties prefer the diagonal step.
DtwResult dtw(std::span<const double> ref, std::span<const double> other);
double path_cost(std::span<const double> ref, std::span<const double> other, const WarpPath& path);

/// m points from t0 to t1, the last one exactly t1.
std::vector<double> uniform_grid(double t0, double t1, std::size_t m);

/// Piecewise-linear interpolation of sample rows at the grid times (clamped at the ends).
Eigen::MatrixXd resample(std::span<const double> times, const Eigen::MatrixXd& values, std::span<const double> grid);

struct AlignOptions {
  std::optional<std::string> reference;  // demonstration id; median sample count when unset
  std::size_t grid = 25;
};

struct AlignmentResult {
  std::string reference_id;
  std::vector<WarpPath> paths;  // one per demonstration, in input order
  std::vector<double> costs;
  DemonstrationSet aligned;     // every demonstration on the same uniform grid over [0, t_R]
};

AlignmentResult dtw_align(const DemonstrationSet& set, const AlignOptions& options = {});

/// Index of the demonstration with the median sample count (lower median, first on ties).
std::size_t median_reference(const DemonstrationSet& set);

struct TimeScaler {
  enum class Mode { linear };

  double t_ref = 1.0;      // t_R
  double t_desired = 1.0;  // t_D
  Mode mode = Mode::linear;

  /// s(t) for a demonstration starting at t0.
  double operator()(double t, double t0 = 0.0) const;
};

/// Maps timestamps through the scaler; outputs are untouched. Throws DataError
/// for non-positive durations or when the demonstration does not last t_R.
Demonstration time_scale(const Demonstration& d, const TimeScaler& scaler);

}  // namespace lfdgp
