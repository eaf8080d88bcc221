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
#include <span>
#include <vector>

#include "lfdgp/domain.hpp"
#include "lfdgp/gp.hpp"
#include "lfdgp/kernels.hpp"

namespace lfdgp {

struct ViaPoint {
  TaskPoint x;
  std::vector<double> y;         // one value per output
  std::vector<double> strength;  // variance r_v per output (output units squared)
};

struct ViaPointSet {
  std::vector<ViaPoint> points;

  bool empty() const noexcept { return points.empty(); }
  /// Throws DataError on out-of-domain inputs, wrong output sizes or non-positive strengths.
  void validate(const TaskSchema& schema, std::size_t outputs) const;
};

/// Posterior of one output given only the via-points, under a frozen kernel and
/// prior mean. The returned variance excludes observation noise at the query.
GaussianPrediction viapoint_posterior(const TaskSchema& schema, const KernelSpec& kernel, double mean,
                                      const ViaPointSet& via, std::size_t output, const Eigen::MatrixXd& query,
                                      bool full_cov);

/// Via-point distributions for every output, reusing each policy model's kernel and mean.
PredictiveDistribution viapoint_distribution(const ViaPointSet& via, std::span<const GPModel> models,
                                             std::span<const TaskPoint> query, bool full_cov);

enum class FusionMode { full, diagonal };

/// Product of the policy and via-point Gaussians on the same query grid:
/// mu = Sv (Sd + Sv)^{-1} mu_d + Sd (Sd + Sv)^{-1} mu_v, Sigma = Sd (Sd + Sv)^{-1} Sv.
/// The diagonal mode fuses each query point independently.
PredictiveDistribution condition(const PredictiveDistribution& policy, const PredictiveDistribution& via,
                                 FusionMode mode = FusionMode::full);

/// A policy posterior computed once over a fixed query grid, then fused with
/// any number of via-point sets.
class PolicyModulator {
 public:
  PolicyModulator(std::vector<GPModel> models, std::vector<TaskPoint> query, FusionMode mode = FusionMode::full);

  const PredictiveDistribution& policy() const noexcept { return policy_; }
  const std::vector<GPModel>& models() const noexcept { return models_; }
  PredictiveDistribution modulate(const ViaPointSet& via) const;

 private:
  std::vector<GPModel> models_;
  FusionMode mode_;
  PredictiveDistribution policy_;
};

}  // namespace lfdgp
