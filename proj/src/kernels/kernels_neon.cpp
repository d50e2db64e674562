#include "stagetree/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace stagetree::kernels::neon {

void uct_dp_batch(const UctBatch& p, const double* values, const double* visits, double* out,
                  std::size_t n) {
  const float64x2_t unvisited = vdupq_n_f64(p.alpha_unvisited);
  const float64x2_t explore = vdupq_n_f64(p.alpha_explore);
  const float64x2_t log_parent = vdupq_n_f64(p.log_parent_visits);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(values + i);
    const float64x2_t c = vld1q_f64(visits + i);
    const uint64x2_t is_zero = vceqzq_f64(c);
    const float64x2_t count = vbslq_f64(is_zero, unvisited, c);
    const float64x2_t mean = vdivq_f64(v, count);
    // vmulq + vaddq rather than vfmaq: keep scalar rounding.
    const float64x2_t bonus = vmulq_f64(explore, vsqrtq_f64(vdivq_f64(log_parent, count)));
    vst1q_f64(out + i, vaddq_f64(mean, bonus));
  }
  if (i < n) scalar::uct_dp_batch(p, values + i, visits + i, out + i, n - i);
}

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  return vaddvq_f64(acc) + scalar::sum_squared_diff(a + i, b + i, n - i);
}

}  // namespace stagetree::kernels::neon

#endif
