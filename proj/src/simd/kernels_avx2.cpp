// AVX2 variants. Compiled with -mavx2 -mfma -ffp-contract=off; only reached
// through the dispatch table after a CPUID check.

#include <immintrin.h>

#include "fpnn/simd/kernels.hpp"

namespace fpnn::simd::avx2 {

namespace {

inline float hsum(__m256 v) noexcept {
  __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

}  // namespace

float dot(const float* a, const float* b, std::size_t n) {
  std::size_t i = 0;
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  if (i + 8 <= n) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    i += 8;
  }
  float acc = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void sgd_update(float* w, const float* g, float* v, std::size_t n, float lr, float momentum, float decay) {
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 vm = _mm256_set1_ps(momentum);
  const __m256 vd = _mm256_set1_ps(decay);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 wi = _mm256_loadu_ps(w + i);
    const __m256 gd = _mm256_add_ps(_mm256_loadu_ps(g + i), _mm256_mul_ps(vd, wi));
    const __m256 vi = _mm256_sub_ps(_mm256_mul_ps(vm, _mm256_loadu_ps(v + i)), _mm256_mul_ps(vlr, gd));
    _mm256_storeu_ps(v + i, vi);
    _mm256_storeu_ps(w + i, _mm256_add_ps(wi, vi));
  }
  scalar::sgd_update(w + i, g + i, v + i, n - i, lr, momentum, decay);
}

void trilerp_packed(const float* base, std::size_t stride, std::size_t row, std::size_t slice,
                    const scalar::CornerWeights<float>& w, float* out) {
  const float* c0 = base;
  const float* c1 = base + stride;
  const float* c2 = base + row;
  const float* c3 = base + row + stride;
  const float* c4 = base + slice;
  const float* c5 = base + slice + stride;
  const float* c6 = base + slice + row;
  const float* c7 = base + slice + row + stride;
  const __m256 w0 = _mm256_set1_ps(w[0]);
  const __m256 w1 = _mm256_set1_ps(w[1]);
  const __m256 w2 = _mm256_set1_ps(w[2]);
  const __m256 w3 = _mm256_set1_ps(w[3]);
  const __m256 w4 = _mm256_set1_ps(w[4]);
  const __m256 w5 = _mm256_set1_ps(w[5]);
  const __m256 w6 = _mm256_set1_ps(w[6]);
  const __m256 w7 = _mm256_set1_ps(w[7]);
  for (std::size_t c = 0; c < stride; c += 8) {
    __m256 acc = _mm256_mul_ps(w0, _mm256_loadu_ps(c0 + c));
    acc = _mm256_add_ps(acc, _mm256_mul_ps(w1, _mm256_loadu_ps(c1 + c)));
    acc = _mm256_add_ps(acc, _mm256_mul_ps(w2, _mm256_loadu_ps(c2 + c)));
    acc = _mm256_add_ps(acc, _mm256_mul_ps(w3, _mm256_loadu_ps(c3 + c)));
    acc = _mm256_add_ps(acc, _mm256_mul_ps(w4, _mm256_loadu_ps(c4 + c)));
    acc = _mm256_add_ps(acc, _mm256_mul_ps(w5, _mm256_loadu_ps(c5 + c)));
    acc = _mm256_add_ps(acc, _mm256_mul_ps(w6, _mm256_loadu_ps(c6 + c)));
    acc = _mm256_add_ps(acc, _mm256_mul_ps(w7, _mm256_loadu_ps(c7 + c)));
    _mm256_storeu_ps(out + c, acc);
  }
}

}  // namespace fpnn::simd::avx2
