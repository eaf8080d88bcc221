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

#include <span>
#include <string>
#include <vector>

#include "lfdgp/kernels.hpp"

namespace lfdgp {

/// Flat named hyperparameter vector in transformed (unconstrained, bounded) space.
struct HyperParams {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return values.size(); }
  bool within_bounds() const;
};

/// Data-dependent scales used to set parameter bounds.
struct ScaleHints {
  std::vector<double> dim_range;  // per schema dim; only real dims are read
  double output_variance = 1.0;
};

ScaleHints scale_hints(const TaskSchema& schema, const Eigen::MatrixXd& encoded, double output_variance);

/// Maps a kernel template to a flat parameter vector and back.
///
/// Entries: log amplitude; log lengthscale per real / warped-real dim; a logit
/// for each cosine beta (onto (0, pi)); a logit per CS covariance (onto the
/// open feasible interval); for grouped CS, a logit per within-group
/// correlation and an atanh canonical partial correlation per group pair.
/// Every vector inside the bounds decodes to a positive semidefinite kernel.
class KernelParamCodec {
 public:
  KernelParamCodec(KernelSpec templ, const TaskSchema& schema, const ScaleHints& hints);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  KernelSpec decode(std::span<const double> theta) const;
  /// Inverse of decode, clamped into the bounds.
  std::vector<double> encode(const KernelSpec& spec) const;

 private:
  KernelSpec templ_;
  std::vector<std::string> names_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

double logistic(double x);
double logit(double p);

/// Correlation matrix from canonical partial correlations (row-major strict lower triangle).
Eigen::MatrixXd correlation_from_cpc(std::size_t dim, std::span<const double> cpc);
std::vector<double> cpc_from_correlation(const Eigen::MatrixXd& corr);

}  // namespace lfdgp
