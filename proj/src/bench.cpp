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

#include "lfdgp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lfdgp/domain.hpp"
#include "lfdgp/error.hpp"
#include "lfdgp/kernels.hpp"
#include "lfdgp/replication.hpp"
#include "lfdgp/synthetic.hpp"

namespace lfdgp {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <class F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

double max_abs(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

BenchWhat bench_what_from_string(const std::string& name) {
  if (name == "loglik") return BenchWhat::loglik;
  if (name == "predict") return BenchWhat::predict;
  throw UsageError("unknown benchmark '" + name + "' (loglik or predict)");
}

std::vector<BenchRow> bench_replication(const BenchConfig& config) {
  if (config.n < 2 || config.repeats < 1 || config.queries < 1) throw UsageError("bench needs n >= 2 and repeats >= 1");
  const double lambda = 0.05;
  KernelSpec spec;
  spec.amplitude = 0.1;
  spec.components.emplace_back(RealComponent{RealFamily::se, 0.1});

  Eigen::MatrixXd query(static_cast<Eigen::Index>(config.queries), 1);
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    query(i, 0) = config.queries == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(query.rows() - 1);
  }
  const Eigen::MatrixXd kss = Eigen::MatrixXd::Constant(query.rows(), 1, spec.prior_variance());
  const Eigen::VectorXd rstar = Eigen::VectorXd::Constant(query.rows(), lambda);

  std::vector<BenchRow> rows;
  for (std::size_t a : config.replicates) {
    if (a < 1) throw UsageError("replicate counts must be at least 1");
    SyntheticSpec s;
    s.generator = "damped";
    s.grid = {config.n};
    s.replicates = a;
    s.noise = lambda;
    s.seed = config.seed;
    const FlatSamples flat = flatten(gen_synthetic(s));
    const CompressedDataset cd = build_compressed(flat.points, flat.outputs);
    const TaskSchema schema = time_only_schema();
    const Eigen::MatrixXd x_full = encode(schema, flat.points);
    const Eigen::MatrixXd x_unique = encode(schema, cd.unique_points);
    const Eigen::VectorXd y = flat.outputs.col(0);
    const double mean = y.mean();

    auto dense_eval = [&](GaussianPrediction* pred) {
      const FactoredSystem f(gram(spec, x_full), Eigen::VectorXd::Constant(y.size(), lambda), y, mean, 0.0, 0.0);
      if (pred) *pred = f.predict(cross_gram(spec, x_full, query), kss, rstar, false);
      return f.log_likelihood();
    };
    auto compressed_eval = [&](GaussianPrediction* pred) {
      CompressedSystem sys;
      sys.k_n = gram(spec, x_unique);
      sys.noise = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cd.size()), lambda);
      sys.counts.resize(sys.noise.size());
      for (Eigen::Index i = 0; i < sys.counts.size(); ++i) sys.counts(i) = static_cast<double>(cd.counts[static_cast<std::size_t>(i)]);
      sys.ybar = cd.means.col(0);
      sys.sq_dev = cd.sq_dev.col(0);
      sys.mean = mean;
      const FactoredSystem f(sys);
      if (pred) *pred = f.predict(cross_gram(spec, x_unique, query), kss, rstar, false);
      return f.log_likelihood();
    };

    const bool predict = config.what == BenchWhat::predict;
    std::vector<double> td, tc;
    GaussianPrediction pd, pc;
    double ld = 0.0, lc = 0.0;
    for (std::size_t r = 0; r < config.repeats; ++r) {
      td.push_back(time_ms([&] { ld = dense_eval(predict ? &pd : nullptr); }));
      tc.push_back(time_ms([&] { lc = compressed_eval(predict ? &pc : nullptr); }));
    }

    BenchRow row;
    row.n = config.n;
    row.a = a;
    row.total = flat.points.size();
    row.t_dense_ms = median(td);
    row.t_compressed_ms = median(tc);
    row.speedup = row.t_dense_ms / row.t_compressed_ms;
    row.max_abs_diff = predict ? std::max(max_abs(pd.mean, pc.mean), max_abs(pd.variance, pc.variance))
                               : std::abs(ld - lc);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lfdgp
