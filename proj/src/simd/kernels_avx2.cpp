// AVX2/FMA kernel variant. Compiled with -mavx2 -mfma; only reached through
// the dispatch table after a CPU feature check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "ldiag/simd/kernels.hpp"
#include "simd/vector_math_avx2.hpp"

namespace ldiag::simd {

namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void linear_predictor(const double* cols, std::size_t n, std::size_t p, const double* gamma,
                      double* eta) {
  const std::size_t nv = n - n % kLanes;
  const __m256d g0 = _mm256_set1_pd(gamma[0]);
  for (std::size_t i = 0; i < nv; i += kLanes) _mm256_storeu_pd(eta + i, g0);
  for (std::size_t i = nv; i < n; ++i) eta[i] = gamma[0];
  for (std::size_t j = 0; j < p; ++j) {
    const double* x = cols + j * n;
    const __m256d g = _mm256_set1_pd(gamma[j + 1]);
    for (std::size_t i = 0; i < nv; i += kLanes)
      _mm256_storeu_pd(eta + i, _mm256_fmadd_pd(g, _mm256_loadu_pd(x + i), _mm256_loadu_pd(eta + i)));
    for (std::size_t i = nv; i < n; ++i) eta[i] += gamma[j + 1] * x[i];
  }
}

double logit_terms(const double* eta, const double* z, const double* w, std::size_t n, double* score,
                   double* curv) {
  const std::size_t nv = n - n % kLanes;
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  for (std::size_t i = 0; i < nv; i += kLanes) {
    const __m256d x = _mm256_loadu_pd(eta + i);
    const __m256d zi = _mm256_loadu_pd(z + i);
    const __m256d wi = w ? _mm256_loadu_pd(w + i) : one;
    const __m256d e = vmath::exp_nonpositive(_mm256_sub_pd(zero, vmath::abs(x)));
    const __m256d softplus = _mm256_add_pd(_mm256_max_pd(x, zero), vmath::log1p_unit(e));
    const __m256d inv = _mm256_div_pd(one, _mm256_add_pd(one, e));
    const __m256d nonneg = _mm256_cmp_pd(x, zero, _CMP_GE_OQ);
    const __m256d prob = _mm256_blendv_pd(_mm256_mul_pd(e, inv), inv, nonneg);
    acc = _mm256_fmadd_pd(wi, _mm256_fmsub_pd(zi, x, softplus), acc);
    _mm256_storeu_pd(score + i, _mm256_mul_pd(wi, _mm256_sub_pd(zi, prob)));
    _mm256_storeu_pd(curv + i, _mm256_mul_pd(wi, _mm256_mul_pd(_mm256_mul_pd(e, inv), inv)));
  }
  double ll = hsum(acc);
  for (std::size_t i = nv; i < n; ++i) {
    const double e = std::exp(-std::abs(eta[i]));
    const double softplus = std::max(eta[i], 0.0) + std::log1p(e);
    const double inv = 1.0 / (1.0 + e);
    const double prob = eta[i] >= 0.0 ? inv : e * inv;
    const double wi = w ? w[i] : 1.0;
    ll += wi * (z[i] * eta[i] - softplus);
    score[i] = wi * (z[i] - prob);
    curv[i] = wi * (e * inv * inv);
  }
  return ll;
}

// out[c] += sum_i u_i * xj_i * xk[c]_i for c < K; xj == nullptr means a column of ones.
template <int K>
void accumulate_chunk(const double* u, const double* xj, const double* const* xk, std::size_t n,
                      double* out) {
  const std::size_t nv = n - n % kLanes;
  __m256d acc[K];
  for (int c = 0; c < K; ++c) acc[c] = _mm256_setzero_pd();
  for (std::size_t i = 0; i < nv; i += kLanes) {
    __m256d ui = _mm256_loadu_pd(u + i);
    if (xj) ui = _mm256_mul_pd(ui, _mm256_loadu_pd(xj + i));
    for (int c = 0; c < K; ++c) acc[c] = _mm256_fmadd_pd(ui, _mm256_loadu_pd(xk[c] + i), acc[c]);
  }
  for (int c = 0; c < K; ++c) {
    double s = hsum(acc[c]);
    for (std::size_t i = nv; i < n; ++i) s += u[i] * (xj ? xj[i] : 1.0) * xk[c][i];
    out[c] = s;
  }
}

void accumulate_row(const double* u, const double* xj, const double* const* xk, std::size_t count,
                    std::size_t n, double* out) {
  std::size_t c = 0;
  for (; c + 4 <= count; c += 4) accumulate_chunk<4>(u, xj, xk + c, n, out + c);
  switch (count - c) {
    case 3: accumulate_chunk<3>(u, xj, xk + c, n, out + c); break;
    case 2: accumulate_chunk<2>(u, xj, xk + c, n, out + c); break;
    case 1: accumulate_chunk<1>(u, xj, xk + c, n, out + c); break;
    default: break;
  }
}

double plain_sum(const double* u, std::size_t n) {
  const std::size_t nv = n - n % kLanes;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < nv; i += kLanes) acc = _mm256_add_pd(acc, _mm256_loadu_pd(u + i));
  double s = hsum(acc);
  for (std::size_t i = nv; i < n; ++i) s += u[i];
  return s;
}

void normal_equations(const double* cols, std::size_t n, std::size_t p, const double* score,
                      const double* curv, double* grad, double* gram) {
  const std::size_t d = p + 1;
  // Column pointers for covariates 1..p of the augmented design.
  constexpr std::size_t kMaxStack = 64;
  const double* stack_ptrs[kMaxStack];
  std::unique_ptr<const double*[]> heap_ptrs;
  const double** xs = stack_ptrs;
  if (p > kMaxStack) {
    heap_ptrs = std::make_unique<const double*[]>(p);
    xs = heap_ptrs.get();
  }
  for (std::size_t j = 0; j < p; ++j) xs[j] = cols + j * n;

  grad[0] = plain_sum(score, n);
  accumulate_row(score, nullptr, xs, p, n, grad + 1);

  gram[0] = plain_sum(curv, n);
  accumulate_row(curv, nullptr, xs, p, n, gram + 1);
  for (std::size_t j = 1; j < d; ++j)
    accumulate_row(curv, xs[j - 1], xs + (j - 1), p - (j - 1), n, gram + j * d + j);
}

void standardized_residuals(const double* eta, const double* z, std::size_t n, double clip,
                            double* r) {
  const std::size_t nv = n - n % kLanes;
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d lo = _mm256_set1_pd(clip);
  const __m256d hi = _mm256_set1_pd(1.0 - clip);
  for (std::size_t i = 0; i < nv; i += kLanes) {
    const __m256d x = _mm256_loadu_pd(eta + i);
    const __m256d e = vmath::exp_nonpositive(_mm256_sub_pd(zero, vmath::abs(x)));
    const __m256d inv = _mm256_div_pd(one, _mm256_add_pd(one, e));
    const __m256d nonneg = _mm256_cmp_pd(x, zero, _CMP_GE_OQ);
    __m256d prob = _mm256_blendv_pd(_mm256_mul_pd(e, inv), inv, nonneg);
    prob = _mm256_min_pd(_mm256_max_pd(prob, lo), hi);
    const __m256d sd = _mm256_sqrt_pd(_mm256_mul_pd(prob, _mm256_sub_pd(one, prob)));
    _mm256_storeu_pd(r + i, _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(z + i), prob), sd));
  }
  for (std::size_t i = nv; i < n; ++i) {
    const double e = std::exp(-std::abs(eta[i]));
    const double inv = 1.0 / (1.0 + e);
    double prob = eta[i] >= 0.0 ? inv : e * inv;
    prob = std::min(std::max(prob, clip), 1.0 - clip);
    r[i] = (z[i] - prob) / std::sqrt(prob * (1.0 - prob));
  }
}

double weighted_dot(const double* a, const double* b, const double* w, std::size_t n) {
  const std::size_t nv = n - n % (2 * kLanes);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (std::size_t i = 0; i < nv; i += 2 * kLanes) {
    __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    if (w) {
      acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(w + i), acc0);
      acc1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(w + i + 4), acc1);
    } else {
      acc0 = _mm256_add_pd(acc0, p0);
      acc1 = _mm256_add_pd(acc1, p1);
    }
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (std::size_t i = nv; i < n; ++i) s += a[i] * b[i] * (w ? w[i] : 1.0);
  return s;
}

void exp_nonpositive(const double* x, std::size_t n, double* out) {
  const std::size_t nv = n - n % kLanes;
  for (std::size_t i = 0; i < nv; i += kLanes)
    _mm256_storeu_pd(out + i, vmath::exp_nonpositive(_mm256_loadu_pd(x + i)));
  for (std::size_t i = nv; i < n; ++i) out[i] = std::exp(x[i]);
}

void log1p_unit(const double* x, std::size_t n, double* out) {
  const std::size_t nv = n - n % kLanes;
  for (std::size_t i = 0; i < nv; i += kLanes)
    _mm256_storeu_pd(out + i, vmath::log1p_unit(_mm256_loadu_pd(x + i)));
  for (std::size_t i = nv; i < n; ++i) out[i] = std::log1p(x[i]);
}

}  // namespace

const KernelSet& avx2_kernel_table() noexcept {
  static const KernelSet set{"avx2", &linear_predictor, &logit_terms, &normal_equations,
                             &standardized_residuals, &weighted_dot, &exp_nonpositive,
                             &log1p_unit};
  return set;
}

}  // namespace ldiag::simd
