#include <atomic>
#include <cstdlib>
#include <cstring>

#include "stagetree/error.hpp"
#include "stagetree/kernels.hpp"

namespace stagetree::kernels {
namespace {

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::LengthMismatch, "kernel inputs differ in length");
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() noexcept {
  if (const char* force = std::getenv("STAGETREE_FORCE_SCALAR"); force && std::strcmp(force, "1") == 0) {
    return Isa::Scalar;
  }
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  if (isa_supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) noexcept {
  active().store(isa_supported(isa) ? isa : Isa::Scalar, std::memory_order_relaxed);
}

void uct_dp_batch(const UctBatch& p, std::span<const double> values, std::span<const double> visits,
                  std::span<double> out) {
  check_sizes(values.size(), visits.size());
  check_sizes(values.size(), out.size());
  switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return avx2::uct_dp_batch(p, values.data(), visits.data(), out.data(), out.size());
#endif
#if defined(__aarch64__)
    case Isa::Neon: return neon::uct_dp_batch(p, values.data(), visits.data(), out.data(), out.size());
#endif
    default: return scalar::uct_dp_batch(p, values.data(), visits.data(), out.data(), out.size());
  }
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return avx2::sum_squared_diff(a.data(), b.data(), a.size());
#endif
#if defined(__aarch64__)
    case Isa::Neon: return neon::sum_squared_diff(a.data(), b.data(), a.size());
#endif
    default: return scalar::sum_squared_diff(a.data(), b.data(), a.size());
  }
}

}  // namespace stagetree::kernels
