// Copyright 2026-present the rsaa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2 + FMA kernel variants. Compiled with -mavx2 -mfma; only reached
// through avx2_kernels() after a runtime CPU check.

#include <immintrin.h>

#include <cfloat>
#include <cstdint>
#include <limits>

#include "rsaa/kernels.hpp"

namespace rsaa::kernels {
namespace {

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kExpHi = 709.782712893383973096;
constexpr double kExpLo = -708.39641853226410622;
constexpr double kMagic = 6755399441055744.0;  // 1.5 * 2^52

// Exact for |k| < 2^51 when k holds an integral double.
inline __m256i to_int64(__m256d k) {
  const __m256d m = _mm256_set1_pd(kMagic);
  return _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, m)), _mm256_castpd_si256(m));
}

inline __m256d to_double(__m256i k) {
  const __m256d m = _mm256_set1_pd(kMagic);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(k, _mm256_castpd_si256(m))), m);
}

inline __m256d pow2(__m256i k) {
  return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(k, _mm256_set1_epi64x(1023)), 52));
}

// exp(x): Cody-Waite reduction, degree-13 Taylor polynomial on |r| <= ln2/2,
// scaling split in two factors so that 2^1024 never forms. Inputs below the
// normal range flush to zero.
inline __m256d exp_pd(__m256d x) {
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(kExpLo)), _mm256_set1_pd(kExpHi));
  const __m256d k =
      _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(kLog2e)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Hi), xc);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(kLn2Lo), r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
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

  const __m256d k1 = _mm256_round_pd(_mm256_mul_pd(k, _mm256_set1_pd(0.5)), _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
  const __m256d k2 = _mm256_sub_pd(k, k1);
  __m256d res = _mm256_mul_pd(_mm256_mul_pd(p, pow2(to_int64(k1))), pow2(to_int64(k2)));

  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  res = _mm256_blendv_pd(res, inf, _mm256_cmp_pd(x, _mm256_set1_pd(kExpHi), _CMP_GT_OQ));
  res = _mm256_blendv_pd(res, _mm256_setzero_pd(), _mm256_cmp_pd(x, _mm256_set1_pd(kExpLo), _CMP_LT_OQ));
  res = _mm256_blendv_pd(res, x, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
  return res;
}

// log(x) for positive normal x: x = m 2^e with m in [sqrt(1/2), sqrt(2)),
// log m = 2 atanh(s), s = (m-1)/(m+1), |s| <= 0.1716, odd series to s^25.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  __m256i e = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1023));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                                                  _mm256_set1_epi64x(0x3FF0000000000000LL)));
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.41421356237309504880), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_epi64(e, _mm256_and_si256(_mm256_castpd_si256(big), _mm256_set1_epi64x(1)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d q = _mm256_set1_pd(1.0 / 25.0);
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 23.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 21.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 19.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 17.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 15.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 13.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 11.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 9.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 7.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 5.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 3.0));
  // 2s + 2s*s2*q keeps the leading term exact.
  const __m256d two_s = _mm256_add_pd(s, s);
  const __m256d logm = _mm256_fmadd_pd(_mm256_mul_pd(two_s, s2), q, two_s);
  const __m256d ed = to_double(e);
  return _mm256_fmadd_pd(ed, _mm256_set1_pd(kLn2Hi), _mm256_fmadd_pd(ed, _mm256_set1_pd(kLn2Lo), logm));
}

// t^a for t > 0 (normal range); zero for t <= 0 or subnormal t.
inline __m256d pow_pos(__m256d t, double a) {
  const __m256d valid = _mm256_cmp_pd(t, _mm256_set1_pd(DBL_MIN), _CMP_GE_OQ);
  const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), t, valid);
  const __m256d r = exp_pd(_mm256_mul_pd(_mm256_set1_pd(a), log_pd(safe)));
  return _mm256_and_pd(r, valid);
}

inline __m256d conj_pd(const ConjParams& c, __m256d t) {
  switch (c.family) {
    case Family::avar:
      return _mm256_mul_pd(_mm256_set1_pd(c.scale), _mm256_max_pd(t, _mm256_setzero_pd()));
    case Family::entropic: {
      const __m256d r = _mm256_set1_pd(c.rate);
      return _mm256_div_pd(_mm256_sub_pd(exp_pd(_mm256_mul_pd(r, t)), _mm256_set1_pd(1.0)), r);
    }
    case Family::polynomial: {
      if (c.power == 2.0) {
        const __m256d tp = _mm256_max_pd(t, _mm256_setzero_pd());
        return _mm256_mul_pd(_mm256_set1_pd(c.coef), _mm256_mul_pd(tp, tp));
      }
      return _mm256_mul_pd(_mm256_set1_pd(c.coef), pow_pos(t, c.power));
    }
  }
  return _mm256_setzero_pd();
}

// Returns (dminus, dplus) lanes.
inline void deriv_pd(const ConjParams& c, __m256d t, __m256d& dm, __m256d& dp) {
  switch (c.family) {
    case Family::avar: {
      const __m256d s = _mm256_set1_pd(c.scale);
      dm = _mm256_and_pd(s, _mm256_cmp_pd(t, _mm256_setzero_pd(), _CMP_GT_OQ));
      dp = _mm256_and_pd(s, _mm256_cmp_pd(t, _mm256_setzero_pd(), _CMP_GE_OQ));
      return;
    }
    case Family::entropic:
      dm = exp_pd(_mm256_mul_pd(_mm256_set1_pd(c.rate), t));
      dp = dm;
      return;
    case Family::polynomial:
      dm = c.power == 2.0 ? _mm256_max_pd(t, _mm256_setzero_pd()) : pow_pos(t, c.power - 1.0);
      dp = dm;
      return;
  }
}

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double conj_sum_avx2(const ConjParams& c, const double* y, std::size_t n, double shift) {
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc = _mm256_add_pd(acc, conj_pd(c, _mm256_add_pd(_mm256_loadu_pd(y + j), sh)));
  }
  double total = hsum(acc);
  for (; j < n; ++j) total += conj(c, y[j] + shift);
  return total;
}

double conj_wsum_avx2(const ConjParams& c, const double* y, const double* w, std::size_t n,
                      double shift) {
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d v = conj_pd(c, _mm256_add_pd(_mm256_loadu_pd(y + j), sh));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), v, acc);
  }
  double total = hsum(acc);
  for (; j < n; ++j) total += w[j] * conj(c, y[j] + shift);
  return total;
}

DerivSums deriv_sum_avx2(const ConjParams& c, const double* y, std::size_t n, double shift) {
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d am = _mm256_setzero_pd();
  __m256d ap = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dm, dp;
    deriv_pd(c, _mm256_add_pd(_mm256_loadu_pd(y + j), sh), dm, dp);
    am = _mm256_add_pd(am, dm);
    ap = _mm256_add_pd(ap, dp);
  }
  DerivSums s{hsum(am), hsum(ap)};
  for (; j < n; ++j) {
    s.minus += conj_dminus(c, y[j] + shift);
    s.plus += conj_dplus(c, y[j] + shift);
  }
  return s;
}

DerivSums deriv_wsum_avx2(const ConjParams& c, const double* y, const double* w, std::size_t n,
                          double shift) {
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d am = _mm256_setzero_pd();
  __m256d ap = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dm, dp;
    deriv_pd(c, _mm256_add_pd(_mm256_loadu_pd(y + j), sh), dm, dp);
    const __m256d wj = _mm256_loadu_pd(w + j);
    am = _mm256_fmadd_pd(wj, dm, am);
    ap = _mm256_fmadd_pd(wj, dp, ap);
  }
  DerivSums s{hsum(am), hsum(ap)};
  for (; j < n; ++j) {
    s.minus += w[j] * conj_dminus(c, y[j] + shift);
    s.plus += w[j] * conj_dplus(c, y[j] + shift);
  }
  return s;
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{"avx2", conj_sum_avx2, conj_wsum_avx2, deriv_sum_avx2, deriv_wsum_avx2};

}  // namespace rsaa::kernels
