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

#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "lfdgp/simd/kernel_ops.hpp"
#include "variants.hpp"

namespace lfdgp::simd {
namespace {

bool cpu_has_avx2() {
#if defined(LFDGP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelOps& scalar_table() {
  static const KernelOps ops = detail::make_scalar_ops();
  return ops;
}

const KernelOps* avx2_table() {
#if defined(LFDGP_HAVE_AVX2)
  static const KernelOps ops = detail::make_avx2_ops();
  static const bool supported = cpu_has_avx2();
  return supported ? &ops : nullptr;
#else
  return nullptr;
#endif
}

const KernelOps* initial_selection() {
  if (const char* env = std::getenv("LFDGP_SIMD")) {
    auto isa = isa_from_string(env);
    if (isa == Isa::scalar) return &scalar_table();
    if (isa == Isa::avx2 && avx2_table()) return avx2_table();
  }
  if (const KernelOps* ops = avx2_table()) return ops;
  return &scalar_table();
}

std::atomic<const KernelOps*>& selection() {
  static std::atomic<const KernelOps*> current{initial_selection()};
  return current;
}

}  // namespace

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

std::optional<Isa> isa_from_string(const std::string& name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  return std::nullopt;
}

const KernelOps& scalar_ops() { return scalar_table(); }
const KernelOps* avx2_ops() { return avx2_table(); }

bool available(Isa isa) {
  return isa == Isa::scalar || (isa == Isa::avx2 && avx2_table() != nullptr);
}

const KernelOps& active_ops() { return *selection().load(std::memory_order_acquire); }

void select(Isa isa) {
  if (isa == Isa::scalar) {
    selection().store(&scalar_table(), std::memory_order_release);
    return;
  }
  const KernelOps* ops = avx2_table();
  if (ops == nullptr) throw std::invalid_argument("avx2 kernels are not available on this machine");
  selection().store(ops, std::memory_order_release);
}

}  // namespace lfdgp::simd
