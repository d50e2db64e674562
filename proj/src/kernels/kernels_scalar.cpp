#include <cmath>

#include "stagetree/kernels.hpp"

namespace stagetree::kernels::scalar {

void uct_dp_batch(const UctBatch& p, const double* values, const double* visits, double* out,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double count = visits[i] == 0.0 ? p.alpha_unvisited : visits[i];
    out[i] = values[i] / count + p.alpha_explore * std::sqrt(p.log_parent_visits / count);
  }
}

double sum_squared_diff(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace stagetree::kernels::scalar
