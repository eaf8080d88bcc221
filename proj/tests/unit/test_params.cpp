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
#include <numbers>

#include "lfdgp/error.hpp"
#include "lfdgp/params.hpp"
#include "test_util.hpp"

using namespace lfdgp;

namespace {

TaskSchema grouped_schema() {
  return TaskSchema({DimSpec::real("t", 0.0, 4.0), DimSpec::integer("s", 1, 5),
                     DimSpec::categorical("u", {"A", "B", "C", "D", "E", "F", "G"},
                                          {"x", "x", "y", "y", "y", "z", "x"})},
                    0);
}

std::vector<double> random_theta(const KernelParamCodec& codec, std::mt19937_64& rng) {
  std::vector<double> theta(codec.size());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = testing::uniform(rng, codec.lower()[i], codec.upper()[i]);
  return theta;
}

}  // namespace

TEST_CASE("logistic and logit are inverse") {
  for (double x : {-7.5, -1.0, 0.0, 0.3, 6.0}) CHECK(logit(logistic(x)) == doctest::Approx(x).epsilon(1e-12));
  CHECK(logistic(0.0) == 0.5);
}

TEST_CASE("codec layout and bounds") {
  const TaskSchema schema = testing::mixed_schema();
  ScaleHints h;
  h.dim_range = {2.0, 1.0, 1.0};
  h.output_variance = 0.5;
  const KernelParamCodec codec(default_kernel(schema, {}), schema, h);
  REQUIRE(codec.size() == 4);
  CHECK(codec.names() == std::vector<std::string>{"log_amplitude", "t.log_lengthscale", "s.beta_logit", "u.c_logit"});
  CHECK(codec.lower()[0] == doctest::Approx(std::log(5e-4)));
  CHECK(codec.upper()[0] == doctest::Approx(std::log(500.0)));
  CHECK(codec.lower()[1] == doctest::Approx(std::log(0.02)));
  CHECK(codec.upper()[1] == doctest::Approx(std::log(20.0)));

  const KernelSpec lo = codec.decode(codec.lower());
  const KernelSpec hi = codec.decode(codec.upper());
  CHECK(std::get<IntegerComponent>(lo.components[1]).beta > 0.0);
  CHECK(std::get<IntegerComponent>(hi.components[1]).beta < std::numbers::pi);
  CHECK(std::get<CsComponent>(lo.components[2]).c > cs_lower_bound(4));
  CHECK(std::get<CsComponent>(hi.components[2]).c < 1.0);
  CHECK_THROWS_AS(codec.decode(std::vector<double>(3, 0.0)), SchemaError);
}

TEST_CASE("scale hints use real-dim data ranges") {
  const TaskSchema schema = testing::mixed_schema();
  Eigen::MatrixXd x(3, 3);
  x << 0.1, 1, 0, 0.6, 3, 1, 0.4, 5, 2;
  const ScaleHints h = scale_hints(schema, x, 2.0);
  CHECK(h.dim_range[0] == doctest::Approx(0.5));
  CHECK(h.dim_range[1] == 1.0);
  CHECK(h.output_variance == 2.0);
  Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(2, 3);
  CHECK(scale_hints(schema, flat, 1.0).dim_range[0] == 1.0);
}

TEST_CASE("every decoded parameter vector is feasible") {
  const TaskSchema schema = grouped_schema();
  ScaleHints h;
  h.dim_range = {4.0, 1.0, 1.0};
  std::mt19937_64 rng(21);
  for (bool grouped : {false, true}) {
    for (auto imode : {IntegerComponent::Mode::cosine, IntegerComponent::Mode::warped_real}) {
      KernelChoice ch;
      ch.grouped_categories = grouped;
      ch.integer_mode = imode;
      const KernelParamCodec codec(default_kernel(schema, ch), schema, h);
      for (int trial = 0; trial < 300; ++trial) {
        const KernelSpec k = codec.decode(random_theta(codec, rng));
        CHECK_NOTHROW(k.validate(schema));
      }
      // Extreme corners as well.
      CHECK_NOTHROW(codec.decode(codec.lower()).validate(schema));
      CHECK_NOTHROW(codec.decode(codec.upper()).validate(schema));
    }
  }
}

TEST_CASE("encode inverts decode") {
  const TaskSchema schema = grouped_schema();
  ScaleHints h;
  h.dim_range = {4.0, 1.0, 1.0};
  std::mt19937_64 rng(5);
  for (bool grouped : {false, true}) {
    KernelChoice ch;
    ch.grouped_categories = grouped;
    const KernelParamCodec codec(default_kernel(schema, ch), schema, h);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> theta = random_theta(codec, rng);
      // Stay away from the saturated ends of the logistic maps.
      for (auto& v : theta) v = std::clamp(v, -3.0, 3.0);
      const std::vector<double> back = codec.encode(codec.decode(theta));
      REQUIRE(back.size() == theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i) CHECK(back[i] == doctest::Approx(theta[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("encode clamps into the bounds") {
  const TaskSchema schema = testing::mixed_schema();
  ScaleHints h;
  h.dim_range = {1.0, 1.0, 1.0};
  const KernelParamCodec codec(default_kernel(schema, {}), schema, h);
  KernelSpec k = default_kernel(schema, {});
  k.amplitude = 1e9;
  std::get<RealComponent>(k.components[0]).lengthscale = 1e-9;
  const auto theta = codec.encode(k);
  CHECK(theta[0] == codec.upper()[0]);
  CHECK(theta[1] == codec.lower()[1]);
}

TEST_CASE("canonical partial correlations") {
  std::mt19937_64 rng(9);
  for (std::size_t dim = 1; dim <= 5; ++dim) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> cpc(dim * (dim - 1) / 2);
      for (auto& z : cpc) z = testing::uniform(rng, -0.95, 0.95);
      const Eigen::MatrixXd corr = correlation_from_cpc(dim, cpc);
      CHECK(corr.diagonal().isOnes(1e-15));
      CHECK(testing::max_abs_diff(corr, corr.transpose()) <= 1e-15);
      CHECK(min_eigenvalue(corr) > 0.0);
      const auto back = cpc_from_correlation(corr);
      REQUIRE(back.size() == cpc.size());
      for (std::size_t i = 0; i < cpc.size(); ++i) CHECK(back[i] == doctest::Approx(cpc[i]).epsilon(1e-10));
    }
  }
  // A single partial correlation is the correlation itself.
  const std::vector<double> one{0.4};
  CHECK(correlation_from_cpc(2, one)(0, 1) == doctest::Approx(0.4));
}
