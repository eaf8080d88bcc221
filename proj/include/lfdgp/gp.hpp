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

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lfdgp/domain.hpp"
#include "lfdgp/hyperopt.hpp"
#include "lfdgp/kernels.hpp"
#include "lfdgp/params.hpp"
#include "lfdgp/replication.hpp"

namespace lfdgp {

/// Replicate statistics of a single output column at the unique locations.
struct OutputStats {
  std::vector<TaskPoint> points;
  Eigen::MatrixXd encoded;
  Eigen::VectorXd counts;
  Eigen::VectorXd ybar;
  Eigen::VectorXd sq_dev;
  std::size_t total_count = 0;

  std::size_t size() const noexcept { return points.size(); }
  double global_mean() const;
  /// Population variance of all N samples, from the sufficient statistics.
  double total_variance() const;
};

OutputStats output_stats(const TaskSchema& schema, const CompressedDataset& data, std::size_t output);

/// Expanded samples of one output, used only by the dense oracle path.
struct RawOutput {
  Eigen::MatrixXd encoded;
  Eigen::VectorXd y;
};

class GPModel;

struct NoiseModel {
  enum class Mode { constant, latent };

  Mode mode = Mode::constant;
  double lambda = 1e-2;
  /// GP over z(x) = log r(x); its predictive mean is exponentiated.
  std::shared_ptr<const GPModel> latent;

  static NoiseModel constant(double lambda);
  static NoiseModel from_latent(std::shared_ptr<const GPModel> latent);

  /// r(x) at encoded points, always positive.
  Eigen::VectorXd at(const Eigen::MatrixXd& encoded) const;
};

enum class MeanMode { zero, constant };

struct FitDiagnostics {
  std::size_t iterations = 0;
  double log_likelihood = 0.0;
  std::size_t evaluations = 0;
  std::vector<double> history;  // log L per noise-model iterate
  std::vector<StartRecord> trace;
};

/// Per-output predictive distributions over a shared query list.
struct PredictiveDistribution {
  std::vector<TaskPoint> query;
  std::vector<GaussianPrediction> outputs;

  std::size_t output_dim() const noexcept { return outputs.size(); }
  bool full_cov() const noexcept { return !outputs.empty() && outputs.front().cov.size() > 0; }
  /// Clamp tiny negative variances (>= -1e-8) to zero for reporting.
  void clamp_variances();
};

/// Fitted single-output GP. Immutable; the factorization of
/// K_n + A_n^{-1} R_n and the solved weights are computed at construction.
class GPModel {
 public:
  GPModel(std::shared_ptr<const TaskSchema> schema, KernelSpec kernel, NoiseModel noise,
          std::shared_ptr<const OutputStats> train, double mean, double jitter = 1e-8,
          std::shared_ptr<const RawOutput> dense = nullptr);

  double log_marginal_likelihood() const { return factor_->log_likelihood(); }

  GaussianPrediction predict_encoded(const Eigen::MatrixXd& query, bool full_cov) const;
  PredictiveDistribution predict(std::span<const TaskPoint> query, bool full_cov) const;

  const TaskSchema& schema() const noexcept { return *schema_; }
  std::shared_ptr<const TaskSchema> schema_ptr() const noexcept { return schema_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  const NoiseModel& noise() const noexcept { return noise_; }
  const OutputStats& train() const noexcept { return *train_; }
  std::shared_ptr<const OutputStats> train_ptr() const noexcept { return train_; }
  double mean() const noexcept { return mean_; }
  double jitter() const noexcept { return jitter_; }
  double jitter_used() const noexcept { return factor_->jitter_used(); }
  bool dense() const noexcept { return dense_ != nullptr; }
  /// Noise variances at the training locations.
  const Eigen::VectorXd& train_noise() const noexcept { return train_noise_; }

  const HyperParams& hyper() const noexcept { return hyper_; }
  void set_hyper(HyperParams h) { hyper_ = std::move(h); }
  const FitDiagnostics& diagnostics() const noexcept { return diagnostics_; }
  void set_diagnostics(FitDiagnostics d) { diagnostics_ = std::move(d); }

  /// Number of predict calls served by this model and its copies.
  std::size_t predict_calls() const noexcept { return predict_calls_->load(); }

 private:
  std::shared_ptr<const TaskSchema> schema_;
  KernelSpec kernel_;
  NoiseModel noise_;
  std::shared_ptr<const OutputStats> train_;
  std::shared_ptr<const RawOutput> dense_;
  double mean_ = 0.0;
  double jitter_ = 1e-8;
  Eigen::VectorXd train_noise_;
  std::shared_ptr<const FactoredSystem> factor_;
  HyperParams hyper_;
  FitDiagnostics diagnostics_;
  std::shared_ptr<std::atomic<std::size_t>> predict_calls_;
};

/// Log marginal likelihood of a model; always evaluated through the compressed system.
double log_marginal_likelihood(const GPModel& model);

enum class NoiseMode { constant, heteroscedastic };

const char* to_string(NoiseMode m);
NoiseMode noise_mode_from_string(const std::string& name);

struct FitControl {
  OptControl opt;  // bounds are filled in by the fitter
  NoiseMode noise = NoiseMode::heteroscedastic;
  MeanMode mean = MeanMode::constant;
  std::size_t max_iter = 10;
  double tol = 1e-4;
  bool compressed = true;
  double jitter = 1e-8;
};

struct TrainingSet {
  std::shared_ptr<const TaskSchema> schema;
  std::vector<std::string> output_names;
  CompressedDataset compressed;
  std::optional<FlatSamples> raw;  // needed when fitting with compressed == false

  static TrainingSet from_samples(const TaskSchema& schema, std::vector<std::string> output_names,
                                  FlatSamples samples, bool keep_raw);
  static TrainingSet from_demonstrations(const DemonstrationSet& set, bool keep_raw);

  std::size_t output_dim() const noexcept { return output_names.size(); }
};

/// Maximum-likelihood fit with a single learnable noise level.
GPModel fit_constant_noise(const TrainingSet& data, std::size_t output, const KernelSpec& templ,
                           const FitControl& control);

/// Constant-noise fit followed by fixed-point refinement of a latent log-noise GP.
/// Returns the iterate with the best log likelihood (max_iter = 0 gives the constant fit).
GPModel fit_heteroscedastic(const TrainingSet& data, std::size_t output, const KernelSpec& templ,
                            const FitControl& control);

/// Independent per-output fits (diagonal coregionalization).
std::vector<GPModel> fit_mogp(const TrainingSet& data, const KernelSpec& templ, const FitControl& control,
                              std::size_t threads = 1);

/// Joint prediction of several independent output models at the same query.
PredictiveDistribution predict_all(std::span<const GPModel> models, std::span<const TaskPoint> query, bool full_cov);

}  // namespace lfdgp
