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

#include <cmath>

#include "variants.hpp"

namespace lfdgp::simd::detail {
namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873127623544;

void se_row(const double* x, double xi, double inv_l, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double u = (x[j] - xi) * inv_l;
    out[j] = std::exp(-0.5 * u * u);
  }
}

void matern52_row(const double* x, double xi, double inv_l, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double r = kSqrt5 * std::abs(x[j] - xi) * inv_l;
    out[j] = (1.0 + r + r * r / 3.0) * std::exp(-r);
  }
}

void mul_inplace(double* acc, const double* k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) acc[j] *= k[j];
}

void add_inplace(double* acc, const double* k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) acc[j] += k[j];
}

void anova_inplace(double* acc, const double* k, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) acc[j] *= 1.0 + k[j];
}

void exp_inplace(double* v, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) v[j] = std::exp(v[j]);
}

}  // namespace

KernelOps make_scalar_ops() {
  return {Isa::scalar, "scalar", &se_row, &matern52_row, &mul_inplace, &add_inplace, &anova_inplace, &exp_inplace};
}

}  // namespace lfdgp::simd::detail
