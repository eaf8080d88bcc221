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

#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "lfdgp/error.hpp"
#include "lfdgp/modulation.hpp"
#include "lfdgp/synthetic.hpp"
#include "test_util.hpp"

using namespace lfdgp;

namespace {

KernelSpec time_kernel(double amp, double l) {
  KernelSpec k;
  k.amplitude = amp;
  k.components = {RealComponent{RealFamily::se, l}};
  return k;
}

GPModel damped_model() {
  SyntheticSpec s;
  s.generator = "damped";
  s.grid = {12};
  s.replicates = 3;
  s.noise = 0.01;
  s.seed = 2;
  const auto set = gen_synthetic(s);
  const auto data = TrainingSet::from_demonstrations(set, false);
  auto st = std::make_shared<const OutputStats>(output_stats(set.schema, data.compressed, 0));
  return GPModel(data.schema, time_kernel(0.2, 0.12), NoiseModel::constant(0.01), st, st->global_mean());
}

std::vector<TaskPoint> time_grid(std::size_t n) {
  std::vector<TaskPoint> q;
  for (std::size_t i = 0; i < n; ++i) q.push_back(TaskPoint{{static_cast<double>(i) / static_cast<double>(n - 1)}});
  return q;
}

ViaPoint via_at(double t, double y, double r) { return ViaPoint{TaskPoint{{t}}, {y}, {r}}; }

Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = testing::uniform(rng, -1, 1);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

PredictiveDistribution wrap(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, std::size_t n) {
  PredictiveDistribution p;
  p.query = time_grid(n);
  GaussianPrediction g;
  g.mean = mean;
  g.cov = cov;
  g.variance = cov.diagonal();
  p.outputs.push_back(g);
  return p;
}

}  // namespace

TEST_CASE("single via-point posterior has a closed form") {
  const TaskSchema schema = time_only_schema();
  const KernelSpec k = time_kernel(0.5, 0.2);
  ViaPointSet via{{via_at(0.3, 1.2, 0.05)}};
  Eigen::MatrixXd q(2, 1);
  q << 0.3, 0.45;
  const auto p = viapoint_posterior(schema, k, 0.1, via, 0, q, false);
  const double g = 0.5 / (0.5 + 0.05);
  CHECK(p.mean(0) == doctest::Approx(0.1 + g * 1.1).epsilon(1e-8));
  CHECK(p.variance(0) == doctest::Approx(0.5 - 0.5 * g).epsilon(1e-8));
  const double kq = 0.5 * std::exp(-0.15 * 0.15 / (2 * 0.04));
  CHECK(p.mean(1) == doctest::Approx(0.1 + kq / 0.55 * 1.1).epsilon(1e-8));
  CHECK(p.variance(1) == doctest::Approx(0.5 - kq * kq / 0.55).epsilon(1e-8));
}

TEST_CASE("two via-points match the explicit 2x2 inverse") {
  const TaskSchema schema = time_only_schema();
  const KernelSpec k = time_kernel(1.3, 0.25);
  ViaPointSet via{{via_at(0.2, 0.5, 0.01), via_at(0.4, -0.3, 0.02)}};
  const double k12 = 1.3 * std::exp(-0.04 / (2 * 0.0625));
  const double a = 1.3 + 0.01, d = 1.3 + 0.02, det = a * d - k12 * k12;
  Eigen::Matrix2d inv;
  inv << d / det, -k12 / det, -k12 / det, a / det;
  const Eigen::Vector2d r(0.5 - 0.2, -0.3 - 0.2);
  Eigen::MatrixXd q(1, 1);
  q << 0.33;
  const Eigen::Vector2d ks(1.3 * std::exp(-0.13 * 0.13 / 0.125), 1.3 * std::exp(-0.07 * 0.07 / 0.125));
  const auto p = viapoint_posterior(schema, k, 0.2, via, 0, q, true);
  CHECK(p.mean(0) == doctest::Approx(0.2 + ks.dot(inv * r)).epsilon(1e-8));
  CHECK(p.cov(0, 0) == doctest::Approx(1.3 - ks.dot(inv * ks)).epsilon(1e-8));
}

TEST_CASE("full fusion equals the information-form product") {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 6;
    const Eigen::MatrixXd sd = random_spd(rng, n), sv = random_spd(rng, n);
    Eigen::VectorXd md(n), mv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      md(i) = testing::uniform(rng, -1, 1);
      mv(i) = testing::uniform(rng, -1, 1);
    }
    const auto fused = condition(wrap(md, sd, 6), wrap(mv, sv, 6), FusionMode::full);
    const Eigen::MatrixXd pd = sd.inverse(), pv = sv.inverse();
    const Eigen::MatrixXd cov = (pd + pv).inverse();
    const Eigen::VectorXd mean = cov * (pd * md + pv * mv);
    CHECK(testing::max_abs_diff(fused.outputs[0].mean, mean) <= 1e-8);
    CHECK(testing::max_abs_diff(fused.outputs[0].cov, cov) <= 1e-8);
    CHECK(fused.outputs[0].cov == fused.outputs[0].cov.transpose());

    // Fusion is symmetric in its two arguments.
    const auto swapped = condition(wrap(mv, sv, 6), wrap(md, sd, 6), FusionMode::full);
    CHECK(testing::max_abs_diff(swapped.outputs[0].mean, fused.outputs[0].mean) <= 1e-10);
    CHECK(testing::max_abs_diff(swapped.outputs[0].cov, fused.outputs[0].cov) <= 1e-10);

    // Conditioning never increases uncertainty.
    CHECK(min_eig(sd - fused.outputs[0].cov) >= -1e-10);
    CHECK(min_eig(sv - fused.outputs[0].cov) >= -1e-10);
  }
}

TEST_CASE("diagonal fusion is the per-point product") {
  const Eigen::Vector3d vd(0.2, 0.5, 1.0), vv(0.1, 2.0, 1.0), md(1, 2, 3), mv(-1, 0, 3);
  PredictiveDistribution d = wrap(md, vd.asDiagonal(), 3), v = wrap(mv, vv.asDiagonal(), 3);
  const auto full = condition(d, v, FusionMode::full);
  for (auto* p : {&d, &v}) p->outputs[0].cov.resize(0, 0);
  const auto diag = condition(d, v, FusionMode::diagonal);
  CHECK_FALSE(diag.full_cov());
  for (int i = 0; i < 3; ++i) {
    CHECK(diag.outputs[0].variance(i) == doctest::Approx(vd(i) * vv(i) / (vd(i) + vv(i))).epsilon(1e-9));
    CHECK(diag.outputs[0].mean(i) == doctest::Approx((vv(i) * md(i) + vd(i) * mv(i)) / (vd(i) + vv(i))).epsilon(1e-9));
  }
  CHECK(testing::max_abs_diff(diag.outputs[0].mean, full.outputs[0].mean) <= 1e-9);
  CHECK(testing::max_abs_diff(diag.outputs[0].variance, full.outputs[0].variance) <= 1e-9);
  CHECK_THROWS_AS(condition(d, v, FusionMode::full), UsageError);
}

TEST_CASE("a strong via-point pins the modulated trajectory") {
  const GPModel m = damped_model();
  const double range = m.train().ybar.maxCoeff() - m.train().ybar.minCoeff();
  const std::vector<GPModel> models{m};
  auto q = time_grid(21);
  const PolicyModulator mod(models, q);
  const double target = m.train().ybar.maxCoeff() + 0.5 * range;
  const ViaPointSet via{{via_at(0.5, target, 1e-6 * range * range)}};
  const auto out = mod.modulate(via);
  CHECK(std::abs(out.outputs[0].mean(10) - target) <= 1e-2 * range);
  CHECK(out.outputs[0].variance(10) <= 1e-5 * range * range);
  CHECK(min_eig(mod.policy().outputs[0].cov - out.outputs[0].cov) >= -1e-8);
  CHECK(out.outputs[0].variance.minCoeff() >= 0.0);
}

TEST_CASE("a distant via-point contributes only the prior") {
  TaskSchema schema({DimSpec::real("t", 0.0, 10.0)}, 0);
  const GPModel base = damped_model();
  const GPModel m(std::make_shared<const TaskSchema>(schema), base.kernel(), base.noise(), base.train_ptr(), base.mean());
  const std::vector<GPModel> models{m};
  const auto q = time_grid(11);
  const PolicyModulator mod(models, q);
  const auto out = mod.modulate(ViaPointSet{{via_at(9.5, 5.0, 1e-2)}});
  const Eigen::MatrixXd prior_cov = gram(m.kernel(), encode(schema, q));
  PredictiveDistribution prior = wrap(Eigen::VectorXd::Constant(11, m.mean()), prior_cov, 11);
  const auto expected = condition(mod.policy(), prior, FusionMode::full);
  CHECK(testing::max_abs_diff(out.outputs[0].mean, expected.outputs[0].mean) <= 1e-8);
  CHECK(testing::max_abs_diff(out.outputs[0].cov, expected.outputs[0].cov) <= 1e-8);
}

TEST_CASE("the modulator reuses its policy posterior") {
  const GPModel m = damped_model();
  const std::vector<GPModel> models{m};
  const auto q = time_grid(9);
  for (auto mode : {FusionMode::full, FusionMode::diagonal}) {
    const PolicyModulator mod(models, q, mode);
    const std::size_t calls = mod.models()[0].predict_calls();
    const ViaPointSet via{{via_at(0.25, 0.3, 1e-3), via_at(0.75, -0.1, 1e-3)}};
    const auto a = mod.modulate(via);
    const auto b = mod.modulate(ViaPointSet{{via_at(0.5, 0.0, 1e-2)}});
    CHECK(mod.models()[0].predict_calls() == calls);
    const bool full = mode == FusionMode::full;
    const auto direct = condition(predict_all(models, q, full), viapoint_distribution(via, models, q, full), mode);
    CHECK(testing::max_abs_diff(direct.outputs[0].mean, a.outputs[0].mean) == 0.0);
    CHECK(testing::max_abs_diff(direct.outputs[0].variance, a.outputs[0].variance) == 0.0);
    CHECK(b.outputs[0].mean.size() == 9);
  }
}

TEST_CASE("invalid via-points and grids") {
  const GPModel m = damped_model();
  const std::vector<GPModel> models{m};
  const auto q = time_grid(5);
  CHECK_THROWS_AS(viapoint_distribution(ViaPointSet{}, models, q, false), DataError);
  CHECK_THROWS_AS(viapoint_distribution(ViaPointSet{{via_at(1.5, 0.0, 0.1)}}, models, q, false), DataError);
  CHECK_THROWS_AS(viapoint_distribution(ViaPointSet{{via_at(0.5, 0.0, 0.0)}}, models, q, false), DataError);
  CHECK_THROWS_AS(viapoint_distribution(ViaPointSet{{ViaPoint{TaskPoint{{0.5}}, {0.0, 1.0}, {0.1, 0.1}}}}, models, q, false),
                  DataError);
  const auto pol = predict_all(models, q, true);
  const auto other = viapoint_distribution(ViaPointSet{{via_at(0.5, 0.0, 0.1)}}, models, time_grid(6), true);
  CHECK_THROWS_AS(condition(pol, other, FusionMode::full), DataError);
}
