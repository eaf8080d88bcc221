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
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lfdgp/domain.hpp"

namespace lfdgp {

enum class Composition { product, sum, anova };
enum class RealFamily { se, matern52 };

const char* to_string(Composition c);
const char* to_string(RealFamily f);
Composition composition_from_string(const std::string& name);
RealFamily real_family_from_string(const std::string& name);

// Component correlations. All are correlation-form: k(x, x) = 1.

/// exp(-tau^2 / (2 l^2))
double k_se(double tau, double lengthscale);
/// (1 + sqrt5 tau / l + 5 tau^2 / (3 l^2)) exp(-sqrt5 tau / l)
double k_matern52(double tau, double lengthscale);
double k_real(RealFamily family, double tau, double lengthscale);

/// Linear warping of the integer range [lo, hi] onto [0, beta).
double cosine_warp(std::int64_t s, std::int64_t lo, std::int64_t hi, double beta);
/// cos(T(s) - T(s')); throws InfeasibleParameterError for beta outside (0, pi].
double k_int_cosine(std::int64_t s, std::int64_t s2, std::int64_t lo, std::int64_t hi, double beta);
/// Linear warping of [lo, hi] onto [0, 1], used by the warped-real integer kernel.
double unit_warp(std::int64_t s, std::int64_t lo, std::int64_t hi);

/// Lower end of the open feasible interval for compound symmetry with v = 1: -1/(L-1).
double cs_lower_bound(std::size_t levels);
/// 1 on equal categories, c otherwise. Throws InfeasibleParameterError when
/// c lies outside (-1/(L-1), 1).
double k_cat_cs(std::size_t u, std::size_t u2, std::size_t levels, double c);

/// Grouped compound symmetry: c(g, g') is the correlation between distinct
/// categories of groups g and g' (within-group on the diagonal).
struct GroupedCsParams {
  std::vector<int> group_of;  // one group id per category
  Eigen::MatrixXd c;          // G x G, symmetric

  std::size_t levels() const noexcept { return group_of.size(); }
  std::size_t groups() const noexcept { return static_cast<std::size_t>(c.rows()); }
};

/// Full L x L correlation matrix of a grouped CS kernel.
Eigen::MatrixXd grouped_cs_matrix(const GroupedCsParams& p);
/// Throws InfeasibleParameterError naming the failing block when the grouped
/// correlation matrix is not positive semidefinite (eigenvalue tolerance -1e-8).
void check_grouped_cs(const GroupedCsParams& p);
double k_cat_grouped(std::size_t u, std::size_t u2, const GroupedCsParams& p);

struct RealComponent {
  RealFamily family = RealFamily::se;
  double lengthscale = 1.0;
};

struct IntegerComponent {
  enum class Mode { cosine, warped_real };
  Mode mode = Mode::cosine;
  RealFamily family = RealFamily::se;  // warped_real only
  double beta = 1.0;                   // cosine only
  double lengthscale = 1.0;            // warped_real only
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct CsComponent {
  std::size_t levels = 1;
  double c = 0.0;
};

struct GroupedCsComponent {
  GroupedCsParams params;
};

using Component = std::variant<RealComponent, IntegerComponent, CsComponent, GroupedCsComponent>;

std::string component_kind(const Component& c);

/// Composition of one component kernel per schema dim with a single global amplitude.
struct KernelSpec {
  Composition composition = Composition::product;
  double amplitude = 1.0;
  std::vector<Component> components;

  /// Throws SchemaError on a component/dim mismatch and InfeasibleParameterError
  /// on out-of-range parameters.
  void validate(const TaskSchema& schema) const;
  /// compose(x, x): amplitude times 1, d or 2^d for product, sum, anova.
  double prior_variance() const;
};

struct KernelChoice {
  Composition composition = Composition::product;
  RealFamily real = RealFamily::se;
  IntegerComponent::Mode integer_mode = IntegerComponent::Mode::cosine;
  RealFamily integer_family = RealFamily::se;
  bool grouped_categories = false;
};

/// Kernel template for a schema with neutral starting parameters.
KernelSpec default_kernel(const TaskSchema& schema, const KernelChoice& choice);

/// Covariance between two encoded points (see lfdgp::encode). Scalar reference path.
double compose(const KernelSpec& spec, std::span<const double> x, std::span<const double> x2);
double compose(const KernelSpec& spec, const TaskSchema& schema, const TaskPoint& x, const TaskPoint& x2);

/// K(a, b) for encoded point rows of `a` and `b`.
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
/// Symmetric Gram matrix with jitter * amplitude added on the diagonal.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x, double jitter = 0.0);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

}  // namespace lfdgp
