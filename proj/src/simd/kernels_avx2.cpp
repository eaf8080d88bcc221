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

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "variants.hpp"

namespace lfdgp::simd::detail {
namespace {

// exp(x) = 2^n * exp(r), |r| <= ln2/2, with a degree-13 Taylor polynomial
// evaluated by FMA Horner steps. Error stays within ~1 ulp of libm.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.44269504088896338700e+00);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d lo_limit = _mm256_set1_pd(-708.39);
  const __m256d hi_limit = _mm256_set1_pd(709.0);

  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo_limit), hi_limit);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, xc);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));

  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  const __m256d overflow = _mm256_cmp_pd(x, hi_limit, _CMP_GT_OQ);
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), underflow);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()), overflow);
  const __m256d is_nan = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  return _mm256_blendv_pd(result, x, is_nan);
}

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

// Applies `body` to full 4-lane blocks, then to a zero-padded tail so every
// element goes through the same vector arithmetic.
template <class Body>
inline void for_blocks(const double* in, double* out, std::size_t n, Body body) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) _mm256_storeu_pd(out + j, body(_mm256_loadu_pd(in + j)));
  if (j < n) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t t = 0; j + t < n; ++t) buf[t] = in[j + t];
    _mm256_store_pd(buf, body(_mm256_load_pd(buf)));
    for (std::size_t t = 0; j + t < n; ++t) out[j + t] = buf[t];
  }
}

void se_row(const double* x, double xi, double inv_l, double* out, std::size_t n) {
  const __m256d vxi = _mm256_set1_pd(xi);
  const __m256d vinv = _mm256_set1_pd(inv_l);
  const __m256d mhalf = _mm256_set1_pd(-0.5);
  for_blocks(x, out, n, [&](__m256d v) {
    const __m256d u = _mm256_mul_pd(_mm256_sub_pd(v, vxi), vinv);
    return exp_pd(_mm256_mul_pd(_mm256_mul_pd(mhalf, u), u));
  });
}

void matern52_row(const double* x, double xi, double inv_l, double* out, std::size_t n) {
  const __m256d vxi = _mm256_set1_pd(xi);
  const __m256d sqrt5 = _mm256_set1_pd(2.23606797749978969640917366873127623544);
  const __m256d vinv = _mm256_set1_pd(inv_l);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d third = _mm256_set1_pd(3.0);
  for_blocks(x, out, n, [&](__m256d v) {
    const __m256d r = _mm256_mul_pd(_mm256_mul_pd(sqrt5, abs_pd(_mm256_sub_pd(v, vxi))), vinv);
    const __m256d poly = _mm256_add_pd(_mm256_add_pd(one, r), _mm256_div_pd(_mm256_mul_pd(r, r), third));
    return _mm256_mul_pd(poly, exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), r)));
  });
}

void mul_inplace(double* acc, const double* k, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(acc + j, _mm256_mul_pd(_mm256_loadu_pd(acc + j), _mm256_loadu_pd(k + j)));
  }
  for (; j < n; ++j) acc[j] *= k[j];
}

void add_inplace(double* acc, const double* k, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(acc + j, _mm256_add_pd(_mm256_loadu_pd(acc + j), _mm256_loadu_pd(k + j)));
  }
  for (; j < n; ++j) acc[j] += k[j];
}

void anova_inplace(double* acc, const double* k, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d f = _mm256_add_pd(one, _mm256_loadu_pd(k + j));
    _mm256_storeu_pd(acc + j, _mm256_mul_pd(_mm256_loadu_pd(acc + j), f));
  }
  for (; j < n; ++j) acc[j] *= 1.0 + k[j];
}

void exp_inplace(double* v, std::size_t n) {
  for_blocks(v, v, n, [](__m256d x) { return exp_pd(x); });
}

}  // namespace

KernelOps make_avx2_ops() {
  return {Isa::avx2, "avx2", &se_row, &matern52_row, &mul_inplace, &add_inplace, &anova_inplace, &exp_inplace};
}

}  // namespace lfdgp::simd::detail
