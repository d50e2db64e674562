#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and SIMD
// variants; the dispatcher picks one at runtime from the CPU features.

#include <cstddef>
#include <span>
#include <string_view>

namespace stagetree::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

/// Best ISA the running CPU supports, honoring STAGETREE_FORCE_SCALAR=1.
Isa detect_isa() noexcept;
Isa active_isa() noexcept;
/// Overrides the dispatch target (tests). Unsupported ISAs fall back to scalar.
void set_active_isa(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;

/// Parameters of the depth-preferred UCT score, shared by every child of one
/// parent.
struct UctBatch {
  double log_parent_visits;  // ln n_visits(parent)
  double alpha_explore;
  double alpha_unvisited;
};

/// out[i] = value[i]/n + alpha_explore * sqrt(log_parent_visits / n),
/// n = alpha_unvisited when visits[i] == 0 else visits[i].
/// Every variant is bit-identical to the scalar reference.
void uct_dp_batch(const UctBatch& p, std::span<const double> values, std::span<const double> visits,
                  std::span<double> out);

/// Sum of (a[i] - b[i])^2. SIMD variants may reassociate the sum.
double sum_squared_diff(std::span<const double> a, std::span<const double> b);

namespace scalar {
void uct_dp_batch(const UctBatch& p, const double* values, const double* visits, double* out,
                  std::size_t n);
double sum_squared_diff(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void uct_dp_batch(const UctBatch& p, const double* values, const double* visits, double* out,
                  std::size_t n);
double sum_squared_diff(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void uct_dp_batch(const UctBatch& p, const double* values, const double* visits, double* out,
                  std::size_t n);
double sum_squared_diff(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

}  // namespace stagetree::kernels
