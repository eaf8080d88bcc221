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
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace lfdgp {

/// Replication-compressed GP system over n unique input locations.
///
/// The N-sample system K_N + R_N with K_N = U K_n U^T is never formed; every
/// solve works on C = K_n + A_n^{-1} R_n. Noise is assumed constant within a
/// replicate block.
struct CompressedSystem {
  Eigen::MatrixXd k_n;     // n x n Gram at unique points, no jitter
  Eigen::VectorXd noise;   // r_i at unique points
  Eigen::VectorXd counts;  // a_i
  Eigen::VectorXd ybar;    // replicate means
  Eigen::VectorXd sq_dev;  // sum_j (y_i^(j) - ybar_i)^2
  double mean = 0.0;       // constant prior mean
  double jitter = 0.0;     // absolute jitter folded into the noise diagonal
  double max_jitter = 0.0; // escalation ceiling (absolute)

  std::size_t size() const noexcept { return static_cast<std::size_t>(ybar.size()); }
  std::size_t total_count() const;
  /// Throws DataError when shapes disagree or counts / noise are not positive.
  void check() const;
};

struct GaussianPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::MatrixXd cov;  // empty unless a full covariance was requested
};

/// Cached Cholesky factorization of a GP system plus the solved weights.
///
/// Jitter escalates x10 from the system's base value up to its ceiling when
/// the factorization fails; the value that succeeded is kept in `jitter_used`.
class FactoredSystem {
 public:
  /// Compressed route: factorizes K_n + A_n^{-1}(R_n + jitter).
  explicit FactoredSystem(const CompressedSystem& sys);
  /// Dense route: factorizes K_N + R_N + jitter on the full sample set.
  FactoredSystem(const Eigen::MatrixXd& k_full, const Eigen::VectorXd& noise, const Eigen::VectorXd& y, double mean,
                 double jitter, double max_jitter);

  double log_likelihood() const noexcept { return log_likelihood_; }
  double jitter_used() const noexcept { return jitter_used_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(alpha_.size()); }

  /// mu = m + K*^T C^{-1} (ybar - m); Sigma = K** + R* - K*^T C^{-1} K*.
  /// `k_star` is (system size) x q; `k_star_star` is q x q when full, else the q prior variances.
  GaussianPrediction predict(const Eigen::MatrixXd& k_star, const Eigen::MatrixXd& k_star_star,
                             const Eigen::VectorXd& noise_star, bool full_cov) const;

 private:
  void factor(const Eigen::MatrixXd& k, const Eigen::VectorXd& diag_of, double jitter, double max_jitter,
              const Eigen::VectorXd* counts);

  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double mean_ = 0.0;
  double jitter_used_ = 0.0;
  double log_likelihood_ = 0.0;
};

/// Compressed log marginal likelihood, including the -(N/2) log 2 pi constant.
double loglik_compressed(const CompressedSystem& sys);
GaussianPrediction predict_compressed(const CompressedSystem& sys, const Eigen::MatrixXd& k_star,
                                      const Eigen::MatrixXd& k_star_star, const Eigen::VectorXd& noise_star,
                                      bool full_cov);

// Dense N x N oracle: no use of replicate structure at all.
double loglik_dense(const Eigen::MatrixXd& k_full, const Eigen::VectorXd& noise, const Eigen::VectorXd& y, double mean,
                    double jitter = 0.0);
GaussianPrediction predict_dense(const Eigen::MatrixXd& k_full, const Eigen::VectorXd& noise, const Eigen::VectorXd& y,
                                 double mean, const Eigen::MatrixXd& k_star, const Eigen::MatrixXd& k_star_star,
                                 const Eigen::VectorXd& noise_star, bool full_cov, double jitter = 0.0);

/// Sum_i r_i^{-1} sum_j (y_i^(j))^2 recovered from replicate statistics.
/// Counters of O(m^3) factorizations on the calling thread.
struct FactorizationStats {
  std::size_t count = 0;
  std::size_t max_dim = 0;
};
FactorizationStats factorization_stats();
void reset_factorization_stats();

}  // namespace lfdgp
