// Built with -mavx2 (and never -mfma): each lane performs the same IEEE
// operations, in the same order, as the scalar reference.

#include "stagetree/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace stagetree::kernels::avx2 {

void uct_dp_batch(const UctBatch& p, const double* values, const double* visits, double* out,
                  std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d unvisited = _mm256_set1_pd(p.alpha_unvisited);
  const __m256d explore = _mm256_set1_pd(p.alpha_explore);
  const __m256d log_parent = _mm256_set1_pd(p.log_parent_visits);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(values + i);
    const __m256d c = _mm256_loadu_pd(visits + i);
    const __m256d is_zero = _mm256_cmp_pd(c, zero, _CMP_EQ_OQ);
    const __m256d count = _mm256_blendv_pd(c, unvisited, is_zero);
    const __m256d mean = _mm256_div_pd(v, count);
    const __m256d bonus = _mm256_mul_pd(explore, _mm256_sqrt_pd(_mm256_div_pd(log_parent, count)));
    _mm256_storeu_pd(out + i, _mm256_add_pd(mean, bonus));
  }
  if (i < n) scalar::uct_dp_batch(p, values + i, visits + i, out + i, n - i);
}

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  return sum + scalar::sum_squared_diff(a + i, b + i, n - i);
}

}  // namespace stagetree::kernels::avx2

#endif
