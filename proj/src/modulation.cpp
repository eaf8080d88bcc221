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

#include "lfdgp/modulation.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "lfdgp/error.hpp"
#include "lfdgp/replication.hpp"

namespace lfdgp {

namespace {

constexpr double kRidge = 1e-10;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

GaussianPrediction fuse_full(const GaussianPrediction& d, const GaussianPrediction& v) {
  Eigen::MatrixXd s = d.cov + v.cov;
  s.diagonal().array() += kRidge;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(symmetrized(s));
  if (ldlt.info() != Eigen::Success) throw NumericalError("fusion system is singular");

  GaussianPrediction out;
  out.mean = v.cov * ldlt.solve(d.mean) + d.cov * ldlt.solve(v.mean);
  out.cov = symmetrized(d.cov * ldlt.solve(v.cov));
  out.cov.diagonal() = out.cov.diagonal().cwiseMax(0.0);
  out.variance = out.cov.diagonal();
  return out;
}

GaussianPrediction fuse_diagonal(const GaussianPrediction& d, const GaussianPrediction& v) {
  GaussianPrediction out;
  const Eigen::ArrayXd s = d.variance.array() + v.variance.array() + kRidge;
  out.mean = (v.variance.array() * d.mean.array() + d.variance.array() * v.mean.array()) / s;
  out.variance = (d.variance.array() * v.variance.array() / s).max(0.0);
  return out;
}

}  // namespace

void ViaPointSet::validate(const TaskSchema& schema, std::size_t outputs) const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const auto v = validate_point(schema, p.x);
    if (!v.empty()) throw DataError("via-point " + std::to_string(i) + ": " + v.front().message);
    if (p.y.size() != outputs || p.strength.size() != outputs) {
      throw DataError("via-point " + std::to_string(i) + " does not match the output dimension");
    }
    for (double r : p.strength) {
      if (!(r > 0.0) || !std::isfinite(r)) throw DataError("via-point strength must be positive");
    }
  }
}

GaussianPrediction viapoint_posterior(const TaskSchema& schema, const KernelSpec& kernel, double mean,
                                      const ViaPointSet& via, std::size_t output, const Eigen::MatrixXd& query,
                                      bool full_cov) {
  if (via.empty()) throw DataError("via-point set is empty");
  std::vector<TaskPoint> xs;
  const auto m = static_cast<Eigen::Index>(via.points.size());
  Eigen::VectorXd y(m), r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& p = via.points[static_cast<std::size_t>(i)];
    xs.push_back(p.x);
    y(i) = p.y.at(output);
    r(i) = p.strength.at(output);
  }
  const Eigen::MatrixXd x = encode(schema, xs);
  const FactoredSystem sys(gram(kernel, x), r, y, mean, kRidge * kernel.amplitude, 1e-4 * kernel.amplitude);
  const Eigen::MatrixXd k_ss =
      full_cov ? gram(kernel, query) : Eigen::MatrixXd::Constant(query.rows(), 1, kernel.prior_variance());
  return sys.predict(cross_gram(kernel, x, query), k_ss, Eigen::VectorXd::Zero(query.rows()), full_cov);
}

PredictiveDistribution viapoint_distribution(const ViaPointSet& via, std::span<const GPModel> models,
                                             std::span<const TaskPoint> query, bool full_cov) {
  if (via.empty()) throw DataError("via-point set is empty");
  if (models.empty()) throw UsageError("no policy models given");
  const TaskSchema& schema = models.front().schema();
  via.validate(schema, models.size());
  for (const auto& p : query) {
    const auto v = validate_point(schema, p);
    if (!v.empty()) throw DataError("query point outside the schema: " + v.front().message);
  }
  const Eigen::MatrixXd xq = encode(schema, query);
  PredictiveDistribution out;
  out.query.assign(query.begin(), query.end());
  for (std::size_t k = 0; k < models.size(); ++k) {
    out.outputs.push_back(viapoint_posterior(schema, models[k].kernel(), models[k].mean(), via, k, xq, full_cov));
  }
  return out;
}

PredictiveDistribution condition(const PredictiveDistribution& policy, const PredictiveDistribution& via,
                                 FusionMode mode) {
  if (policy.query != via.query) throw DataError("policy and via-point grids differ");
  if (policy.output_dim() != via.output_dim()) throw DataError("policy and via-point output dimensions differ");
  if (mode == FusionMode::full && (!policy.full_cov() || !via.full_cov())) {
    throw UsageError("full fusion needs full covariances on both sides");
  }
  PredictiveDistribution out;
  out.query = policy.query;
  for (std::size_t k = 0; k < policy.output_dim(); ++k) {
    const auto& d = policy.outputs[k];
    const auto& v = via.outputs[k];
    out.outputs.push_back(mode == FusionMode::full ? fuse_full(d, v) : fuse_diagonal(d, v));
  }
  return out;
}

PolicyModulator::PolicyModulator(std::vector<GPModel> models, std::vector<TaskPoint> query, FusionMode mode)
    : models_(std::move(models)), mode_(mode) {
  policy_ = predict_all(models_, query, mode_ == FusionMode::full);
}

PredictiveDistribution PolicyModulator::modulate(const ViaPointSet& via) const {
  const PredictiveDistribution v = viapoint_distribution(via, models_, policy_.query, mode_ == FusionMode::full);
  return condition(policy_, v, mode_);
}

}  // namespace lfdgp
