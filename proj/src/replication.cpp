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

#include "lfdgp/replication.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lfdgp/error.hpp"

namespace lfdgp {
namespace {

thread_local FactorizationStats t_stats;

constexpr double kLog2Pi = 1.83787706640934548356065947281123527972;

}  // namespace

FactorizationStats factorization_stats() { return t_stats; }
void reset_factorization_stats() { t_stats = {}; }

std::size_t CompressedSystem::total_count() const {
  double n = counts.sum();
  return static_cast<std::size_t>(std::llround(n));
}

void CompressedSystem::check() const {
  const Eigen::Index n = ybar.size();
  if (k_n.rows() != n || k_n.cols() != n || noise.size() != n || counts.size() != n || sq_dev.size() != n) {
    throw DataError("compressed system components have inconsistent sizes");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(counts(i) >= 1.0)) throw DataError("replicate counts must be >= 1");
    if (!(noise(i) + jitter > 0.0)) throw DataError("noise variances must be positive");
    if (!(sq_dev(i) >= 0.0)) throw DataError("squared deviations must be nonnegative");
  }
}

FactoredSystem::FactoredSystem(const CompressedSystem& sys) : mean_(sys.mean) {
  sys.check();
  factor(sys.k_n, sys.noise, sys.jitter, sys.max_jitter, &sys.counts);

  const Eigen::VectorXd rbar = sys.ybar.array() - sys.mean;
  alpha_ = llt_.solve(rbar);
  const Eigen::VectorXd v = llt_.matrixL().solve(rbar);
  const double q = v.squaredNorm();
  const double logdet = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();

  double within = 0.0;
  double log_rn = 0.0;
  double log_rn_over_a = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < sys.ybar.size(); ++i) {
    const double r = sys.noise(i) + jitter_used_;
    within += sys.sq_dev(i) / r;
    log_rn += sys.counts(i) * std::log(r);
    log_rn_over_a += std::log(r / sys.counts(i));
    total += sys.counts(i);
  }
  log_likelihood_ = -0.5 * (within + q) - 0.5 * (logdet + (log_rn - log_rn_over_a)) - 0.5 * total * kLog2Pi;
}

FactoredSystem::FactoredSystem(const Eigen::MatrixXd& k_full, const Eigen::VectorXd& noise, const Eigen::VectorXd& y,
                               double mean, double jitter, double max_jitter)
    : mean_(mean) {
  if (k_full.rows() != y.size() || k_full.cols() != y.size() || noise.size() != y.size()) {
    throw DataError("dense system components have inconsistent sizes");
  }
  factor(k_full, noise, jitter, max_jitter, nullptr);
  const Eigen::VectorXd r = y.array() - mean;
  alpha_ = llt_.solve(r);
  const Eigen::VectorXd v = llt_.matrixL().solve(r);
  const double q = v.squaredNorm();
  const double logdet = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  log_likelihood_ = -0.5 * q - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

void FactoredSystem::factor(const Eigen::MatrixXd& k, const Eigen::VectorXd& noise, double jitter, double max_jitter,
                            const Eigen::VectorXd* counts) {
  double j = jitter;
  for (;;) {
    Eigen::MatrixXd c = k;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const double r = noise(i) + j;
      c(i, i) += counts ? r / (*counts)(i) : r;
    }
    llt_.compute(c);
    ++t_stats.count;
    t_stats.max_dim = std::max(t_stats.max_dim, static_cast<std::size_t>(c.rows()));
    if (llt_.info() == Eigen::Success && (llt_.matrixLLT().diagonal().array() > 0.0).all()) {
      jitter_used_ = j;
      return;
    }
    if (!(j > 0.0) || j * 10.0 > max_jitter * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "Cholesky factorization failed (size " << c.rows() << ", jitter " << j << ")";
      throw NumericalError(os.str());
    }
    j *= 10.0;
  }
}

GaussianPrediction FactoredSystem::predict(const Eigen::MatrixXd& k_star, const Eigen::MatrixXd& k_star_star,
                                           const Eigen::VectorXd& noise_star, bool full_cov) const {
  const Eigen::Index q = k_star.cols();
  if (k_star.rows() != alpha_.size() || noise_star.size() != q) {
    throw DataError("prediction inputs have inconsistent sizes");
  }
  GaussianPrediction out;
  out.mean = (k_star.transpose() * alpha_).array() + mean_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(k_star);
  if (full_cov) {
    if (k_star_star.rows() != q || k_star_star.cols() != q) throw DataError("K** must be q x q for full covariance");
    Eigen::MatrixXd cov = k_star_star;
    cov.noalias() -= v.transpose() * v;
    cov.diagonal() += noise_star;
    out.cov = 0.5 * (cov + cov.transpose());
    out.variance = out.cov.diagonal();
  } else {
    if (k_star_star.size() != q) throw DataError("prior variances must have one entry per query");
    out.variance.resize(q);
    for (Eigen::Index i = 0; i < q; ++i) {
      out.variance(i) = k_star_star.data()[i] + noise_star(i) - v.col(i).squaredNorm();
    }
  }
  return out;
}

double loglik_compressed(const CompressedSystem& sys) { return FactoredSystem(sys).log_likelihood(); }

GaussianPrediction predict_compressed(const CompressedSystem& sys, const Eigen::MatrixXd& k_star,
                                      const Eigen::MatrixXd& k_star_star, const Eigen::VectorXd& noise_star,
                                      bool full_cov) {
  return FactoredSystem(sys).predict(k_star, k_star_star, noise_star, full_cov);
}

double loglik_dense(const Eigen::MatrixXd& k_full, const Eigen::VectorXd& noise, const Eigen::VectorXd& y, double mean,
                    double jitter) {
  return FactoredSystem(k_full, noise, y, mean, jitter, jitter).log_likelihood();
}

GaussianPrediction predict_dense(const Eigen::MatrixXd& k_full, const Eigen::VectorXd& noise, const Eigen::VectorXd& y,
                                 double mean, const Eigen::MatrixXd& k_star, const Eigen::MatrixXd& k_star_star,
                                 const Eigen::VectorXd& noise_star, bool full_cov, double jitter) {
  return FactoredSystem(k_full, noise, y, mean, jitter, jitter).predict(k_star, k_star_star, noise_star, full_cov);
}

}  // namespace lfdgp
