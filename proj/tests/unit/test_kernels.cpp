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
#include "lfdgp/kernels.hpp"
#include "lfdgp/params.hpp"
#include "test_util.hpp"

using namespace lfdgp;
using std::numbers::pi;

namespace {

Eigen::MatrixXd cs_gram(std::size_t levels, double c) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(levels), static_cast<Eigen::Index>(levels));
  for (std::size_t a = 0; a < levels; ++a) {
    for (std::size_t b = 0; b < levels; ++b) k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = a == b ? 1.0 : c;
  }
  return k;
}

TaskSchema grouped_schema() {
  return TaskSchema({DimSpec::real("t", 0.0, 2.0), DimSpec::integer("s", 2, 6),
                     DimSpec::categorical("u", {"A", "B", "C", "D", "E", "F"}, {"g1", "g1", "g2", "g2", "g2", "g1"})},
                    0);
}

// Hand-written composition of the three component kernels, independent of compose().
double hand_compose(const KernelSpec& k, const TaskPoint& a, const TaskPoint& b, const TaskSchema& schema) {
  const auto& rc = std::get<RealComponent>(k.components[0]);
  const auto& ic = std::get<IntegerComponent>(k.components[1]);
  const double tau = std::abs(std::get<double>(a.coords[0]) - std::get<double>(b.coords[0]));
  const double kr = rc.family == RealFamily::se
                        ? std::exp(-tau * tau / (2 * rc.lengthscale * rc.lengthscale))
                        : (1 + std::sqrt(5.0) * tau / rc.lengthscale + 5 * tau * tau / (3 * rc.lengthscale * rc.lengthscale)) *
                              std::exp(-std::sqrt(5.0) * tau / rc.lengthscale);
  const double sa = static_cast<double>(std::get<std::int64_t>(a.coords[1]));
  const double sb = static_cast<double>(std::get<std::int64_t>(b.coords[1]));
  const double width = static_cast<double>(ic.hi - ic.lo + 1);
  const double kz = std::cos(ic.beta * (sa - sb) / width);
  const auto ua = *schema.dim(2).category_index(std::get<std::string>(a.coords[2]));
  const auto ub = *schema.dim(2).category_index(std::get<std::string>(b.coords[2]));
  const double kk = ua == ub ? 1.0 : std::get<CsComponent>(k.components[2]).c;
  switch (k.composition) {
    case Composition::product:
      return k.amplitude * kr * kz * kk;
    case Composition::sum:
      return k.amplitude * (kr + kz + kk);
    case Composition::anova:
      return k.amplitude * (1 + kr) * (1 + kz) * (1 + kk);
  }
  return 0.0;
}

}  // namespace

TEST_CASE("squared exponential") {
  CHECK(k_se(0.0, 0.3) == 1.0);
  CHECK(k_se(0.3 * std::sqrt(2.0), 0.3) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(k_se(std::sqrt(2.0), 1.0) == doctest::Approx(0.367879).epsilon(1e-6));
  std::mt19937_64 rng(1);
  Eigen::MatrixXd x(20, 1);
  for (int i = 0; i < 20; ++i) x(i, 0) = testing::uniform(rng, 0, 1);
  KernelSpec spec;
  spec.components = {RealComponent{RealFamily::se, 0.2}};
  CHECK(min_eigenvalue(gram(spec, x)) >= -1e-8);
}

TEST_CASE("matern 5/2") {
  CHECK(k_matern52(0.0, 0.7) == 1.0);
  const double oracle = (1.0 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0));
  CHECK(k_matern52(0.7, 0.7) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(oracle == doctest::Approx(0.523994).epsilon(1e-6));
  double prev = 1.0;
  for (int i = 1; i <= 500; ++i) {
    const double v = k_matern52(0.01 * i, 0.5);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("integer cosine kernel") {
  CHECK(k_int_cosine(3, 3, 1, 5, 2.0) == 1.0);
  CHECK(k_int_cosine(1, 5, 1, 5, pi) == doctest::Approx(std::cos(4 * pi / 5)).epsilon(1e-14));
  CHECK(k_int_cosine(1, 5, 1, 5, pi) == doctest::Approx(-0.809017).epsilon(1e-6));
  CHECK(k_int_cosine(2, 4, 1, 5, 1.3) == k_int_cosine(4, 2, 1, 5, 1.3));
  CHECK(cosine_warp(1, 1, 5, pi) == 0.0);
  CHECK(cosine_warp(5, 1, 5, pi) < pi);
  CHECK_THROWS_AS(k_int_cosine(1, 2, 1, 5, 0.0), InfeasibleParameterError);
  CHECK_THROWS_AS(k_int_cosine(1, 2, 1, 5, pi + 1e-9), InfeasibleParameterError);
  for (double beta : {0.1, 1.0, 2.0, pi}) {
    Eigen::MatrixXd k(5, 5);
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 5; ++b) k(a, b) = k_int_cosine(a + 1, b + 1, 1, 5, beta);
    }
    CHECK(min_eigenvalue(k) >= -1e-8);
  }
}

TEST_CASE("compound symmetry feasibility") {
  CHECK(k_cat_cs(1, 1, 3, 0.2) == 1.0);
  CHECK(k_cat_cs(0, 2, 3, 0.2) == 0.2);
  CHECK(cs_lower_bound(3) == doctest::Approx(-0.5));
  CHECK_NOTHROW(k_cat_cs(0, 1, 3, -0.499));
  CHECK_THROWS_AS(k_cat_cs(0, 1, 3, -0.5), InfeasibleParameterError);
  CHECK_THROWS_AS(k_cat_cs(0, 1, 3, 1.0), InfeasibleParameterError);
  CHECK(min_eigenvalue(cs_gram(4, -0.33)) >= -1e-8);
  CHECK(min_eigenvalue(cs_gram(4, -0.34)) < 0.0);
  for (std::size_t levels = 2; levels <= 6; ++levels) {
    const double bound = -1.0 / static_cast<double>(levels - 1);
    CHECK(min_eigenvalue(cs_gram(levels, bound + 1e-3)) >= -1e-8);
    CHECK(min_eigenvalue(cs_gram(levels, bound - 1e-3)) < -1e-8);
  }
}

TEST_CASE("grouped compound symmetry") {
  SUBCASE("singleton groups reduce to CS") {
    GroupedCsParams p;
    p.group_of = {0, 1, 2, 3};
    p.c = Eigen::MatrixXd::Constant(4, 4, 0.3);
    check_grouped_cs(p);
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) CHECK(k_cat_grouped(a, b, p) == k_cat_cs(a, b, 4, 0.3));
    }
  }
  SUBCASE("one group reduces to CS") {
    GroupedCsParams p;
    p.group_of = {0, 0, 0};
    p.c = Eigen::MatrixXd::Constant(1, 1, -0.2);
    check_grouped_cs(p);
    CHECK(testing::max_abs_diff(grouped_cs_matrix(p), cs_gram(3, -0.2)) == 0.0);
  }
  SUBCASE("random feasible parameters give a PSD matrix") {
    const TaskSchema schema = grouped_schema();
    KernelChoice ch;
    ch.grouped_categories = true;
    const KernelSpec templ = default_kernel(schema, ch);
    ScaleHints h;
    h.dim_range = {2.0, 1.0, 1.0};
    const KernelParamCodec codec(templ, schema, h);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> theta(codec.size());
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = testing::uniform(rng, codec.lower()[i], codec.upper()[i]);
      const KernelSpec k = codec.decode(theta);
      const auto& g = std::get<GroupedCsComponent>(k.components[2]).params;
      CHECK_NOTHROW(check_grouped_cs(g));
      CHECK(min_eigenvalue(grouped_cs_matrix(g)) >= -1e-8);
    }
  }
  SUBCASE("infeasible parameters name the failing block") {
    GroupedCsParams p;
    p.group_of = {0, 0, 1, 1};
    p.c = Eigen::MatrixXd::Zero(2, 2);
    p.c(0, 0) = -1.5;
    try {
      check_grouped_cs(p);
      FAIL("expected an infeasible-parameter error");
    } catch (const InfeasibleParameterError& e) {
      CHECK(std::string(e.what()).find("W_0") != std::string::npos);
    }
    // Within-group blocks are fine but the between-group correlation is too strong.
    p.c << 0.0, 1.0, 1.0, 0.0;
    CHECK(min_eigenvalue(grouped_cs_matrix(p)) < -1e-8);
    CHECK_THROWS_AS(check_grouped_cs(p), InfeasibleParameterError);
  }
}

TEST_CASE("compose") {
  const TaskSchema schema = testing::mixed_schema();
  std::mt19937_64 rng(4);
  const TaskPoint x = testing::random_point(schema, rng);
  for (auto comp : {Composition::product, Composition::sum, Composition::anova}) {
    KernelChoice ch;
    ch.composition = comp;
    KernelSpec k = default_kernel(schema, ch);
    k.amplitude = 2.5;
    const double expected = comp == Composition::product ? 2.5 : comp == Composition::sum ? 7.5 : 20.0;
    CHECK(compose(k, schema, x, x) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(k.prior_variance() == doctest::Approx(expected).epsilon(1e-15));
  }

  for (auto comp : {Composition::product, Composition::sum, Composition::anova}) {
    for (auto fam : {RealFamily::se, RealFamily::matern52}) {
      KernelChoice ch;
      ch.composition = comp;
      ch.real = fam;
      KernelSpec k = default_kernel(schema, ch);
      k.amplitude = 0.8;
      std::get<RealComponent>(k.components[0]).lengthscale = 0.37;
      std::get<IntegerComponent>(k.components[1]).beta = 2.1;
      std::get<CsComponent>(k.components[2]).c = -0.2;
      for (int i = 0; i < 10; ++i) {
        const TaskPoint a = testing::random_point(schema, rng), b = testing::random_point(schema, rng);
        CHECK(compose(k, schema, a, b) == doctest::Approx(hand_compose(k, a, b, schema)).epsilon(1e-13));
        CHECK(compose(k, schema, a, b) == compose(k, schema, b, a));
        TaskPoint as = a, bs = b;
        as.coords[0] = std::get<double>(a.coords[0]) + 0.25;
        bs.coords[0] = std::get<double>(b.coords[0]) + 0.25;
        CHECK(std::abs(compose(k, schema, as, bs) - compose(k, schema, a, b)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("gram assembly") {
  const TaskSchema schema = testing::mixed_schema();
  std::mt19937_64 rng(6);
  std::vector<TaskPoint> pts;
  for (int i = 0; i < 25; ++i) pts.push_back(testing::random_point(schema, rng));
  const Eigen::MatrixXd x = encode(schema, pts);
  KernelChoice ch;
  ch.composition = Composition::anova;
  KernelSpec k = default_kernel(schema, ch);
  k.amplitude = 3.0;
  const Eigen::MatrixXd g = gram(k, x, 1e-6);
  CHECK(g == g.transpose());
  for (int i = 0; i < 25; ++i) {
    CHECK(g(i, i) == doctest::Approx(k.prior_variance() + 3e-6).epsilon(1e-14));
    for (int j = 0; j < 25; ++j) {
      const double ref = compose(k, schema, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]) +
                         (i == j ? 3e-6 : 0.0);
      CHECK(g(i, j) == doctest::Approx(ref).epsilon(1e-13));
    }
  }
  CHECK(min_eigenvalue(g) > 0.0);
  const Eigen::MatrixXd c = cross_gram(k, x, x);
  CHECK(testing::max_abs_diff(c + 3e-6 * Eigen::MatrixXd::Identity(25, 25), g) <= 1e-13);
}

TEST_CASE("composed Gram matrices are PSD for random hyperparameters") {
  const TaskSchema schema = grouped_schema();
  std::mt19937_64 rng(12);
  std::vector<TaskPoint> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(testing::random_point(schema, rng));
  const Eigen::MatrixXd x = encode(schema, pts);
  ScaleHints h;
  h.dim_range = {2.0, 1.0, 1.0};
  h.output_variance = 1.0;
  for (auto comp : {Composition::product, Composition::sum, Composition::anova}) {
    for (auto real : {RealFamily::se, RealFamily::matern52}) {
      for (auto imode : {IntegerComponent::Mode::cosine, IntegerComponent::Mode::warped_real}) {
        for (bool grouped : {false, true}) {
          KernelChoice ch{comp, real, imode, real, grouped};
          const KernelParamCodec codec(default_kernel(schema, ch), schema, h);
          for (int trial = 0; trial < 3; ++trial) {
            std::vector<double> theta(codec.size());
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = testing::uniform(rng, codec.lower()[i], codec.upper()[i]);
            const KernelSpec k = codec.decode(theta);
            CHECK(min_eigenvalue(gram(k, x)) >= -1e-8 * k.amplitude);
          }
        }
      }
    }
  }
}

TEST_CASE("kernel spec validation") {
  const TaskSchema schema = testing::mixed_schema();
  KernelSpec k = default_kernel(schema, {});
  CHECK_NOTHROW(k.validate(schema));
  KernelSpec bad = k;
  bad.amplitude = 0.0;
  CHECK_THROWS_AS(bad.validate(schema), InfeasibleParameterError);
  bad = k;
  bad.components.pop_back();
  CHECK_THROWS_AS(bad.validate(schema), SchemaError);
  bad = k;
  std::swap(bad.components[0], bad.components[2]);
  CHECK_THROWS_AS(bad.validate(schema), SchemaError);
  bad = k;
  std::get<CsComponent>(bad.components[2]).c = -0.5;
  CHECK_THROWS_AS(bad.validate(schema), InfeasibleParameterError);
  CHECK(composition_from_string("anova") == Composition::anova);
  CHECK_THROWS(composition_from_string("tensor"));
}
