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
#include <string>
#include <vector>

namespace lfdgp {

enum class BenchWhat { loglik, predict };

BenchWhat bench_what_from_string(const std::string& name);

struct BenchConfig {
  std::size_t n = 50;
  std::vector<std::size_t> replicates = {1, 3, 5, 9};
  std::size_t repeats = 20;
  BenchWhat what = BenchWhat::loglik;
  std::size_t queries = 100;  // prediction grid size
  std::uint64_t seed = 0;
};

struct BenchRow {
  std::size_t n = 0;
  std::size_t a = 0;
  std::size_t total = 0;  // N = n a
  double t_dense_ms = 0.0;
  double t_compressed_ms = 0.0;
  double speedup = 0.0;
  double max_abs_diff = 0.0;
};

/// Times dense versus compressed evaluation on the damped-oscillation model
/// (SE kernel, constant noise 0.05) at n unique times with `a` replicates each.
/// Each repeat runs both paths back to back; the medians are reported.
std::vector<BenchRow> bench_replication(const BenchConfig& config);

}  // namespace lfdgp
