#pragma once

// Four-lane double transcendentals for the AVX2 kernels. Only the ranges the
// logit kernels need are covered: exp on (-inf, 0] and log1p on [0, 1].
// Both are accurate to a few ulp.

#include <immintrin.h>

namespace ldiag::simd::vmath {

inline __m256d abs(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

// e^x for x <= 0. Range reduction x = k ln2 + r, |r| <= ln2/2, then a
// degree-13 Taylor polynomial (truncation error < 5e-18) and an exponent
// bit shift. Inputs below -708 flush to zero.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d floor_x = _mm256_set1_pd(-708.0);

  const __m256d underflow = _mm256_cmp_pd(x, floor_x, _CMP_LT_OQ);
  x = _mm256_max_pd(x, floor_x);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  // 1/13!, 1/12!, ..., 1/1!, 1/0!
  __m256d p = _mm256_set1_pd(1.6059043836821614599e-10);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.0876756987868098979e-9));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.5052108385441718775e-8));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.7557319223985890653e-7));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.7557319223985890653e-6));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.4801587301587301587e-5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.9841269841269841270e-4));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.3888888888888888889e-3));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(8.3333333333333333333e-3));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(4.1666666666666666667e-2));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.6666666666666666667e-1));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // 2^k via the exponent field; k in [-1022, 0] here.
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i bits = _mm256_cvtepi32_epi64(k32);
  bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

// log(1 + x) for x in [0, 1] via 2 atanh(s), s = x / (2 + x). Arguments above
// sqrt(2) - 1 are halved first: log1p(x) = ln2 + log1p((x - 1) / 2), which
// keeps |s| <= 0.1716 so eleven odd terms suffice.
inline __m256d log1p_unit(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d split = _mm256_set1_pd(0.41421356237309504880);
  const __m256d ln2 = _mm256_set1_pd(0.69314718055994530942);

  const __m256d big = _mm256_cmp_pd(x, split, _CMP_GT_OQ);
  const __m256d t = _mm256_blendv_pd(x, _mm256_mul_pd(_mm256_sub_pd(x, one), half), big);
  const __m256d s = _mm256_div_pd(t, _mm256_add_pd(two, t));
  const __m256d s2 = _mm256_mul_pd(s, s);

  // sum_{k=0}^{11} s2^k / (2k + 1)
  __m256d p = _mm256_set1_pd(1.0 / 23.0);
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 21.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 3.0));
  // 2 s (1 + s2 p) = 2s + 2s * s2 * p
  const __m256d two_s = _mm256_add_pd(s, s);
  const __m256d core = _mm256_fmadd_pd(_mm256_mul_pd(two_s, s2), p, two_s);
  return _mm256_add_pd(core, _mm256_and_pd(big, ln2));
}

}  // namespace ldiag::simd::vmath
