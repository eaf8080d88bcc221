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

// Data-parallel inner loops of Gram assembly. Every routine has a scalar
// reference implementation; vector variants are selected at runtime and must
// agree with the reference to a few ulp.

#include <cstddef>
#include <optional>
#include <string>

namespace lfdgp::simd {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);
std::optional<Isa> isa_from_string(const std::string& name);

struct KernelOps {
  Isa isa;
  const char* name;
  // out[j] = exp(-0.5 * ((x[j] - xi) * inv_l)^2)
  void (*se_row)(const double* x, double xi, double inv_l, double* out, std::size_t n);
  // r = sqrt(5) * |x[j] - xi| * inv_l; out[j] = (1 + r + r^2 / 3) * exp(-r)
  void (*matern52_row)(const double* x, double xi, double inv_l, double* out, std::size_t n);
  // acc[j] *= k[j]
  void (*mul_inplace)(double* acc, const double* k, std::size_t n);
  // acc[j] += k[j]
  void (*add_inplace)(double* acc, const double* k, std::size_t n);
  // acc[j] *= 1 + k[j]
  void (*anova_inplace)(double* acc, const double* k, std::size_t n);
  // v[j] = exp(v[j])
  void (*exp_inplace)(double* v, std::size_t n);
};

const KernelOps& scalar_ops();
/// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelOps* avx2_ops();

/// Currently selected ops. Defaults to the widest supported ISA; the
/// LFDGP_SIMD environment variable ("scalar" or "avx2") overrides.
const KernelOps& active_ops();
/// Throws std::invalid_argument when the ISA is unavailable on this machine.
void select(Isa isa);
bool available(Isa isa);

}  // namespace lfdgp::simd
