#include <atomic>

#include "ldiag/simd/kernels.hpp"

namespace ldiag::simd {

#if defined(LDIAG_HAVE_AVX2_TU)
const KernelSet& avx2_kernel_table() noexcept;
#endif

namespace {

bool cpu_has_avx2_fma() noexcept {
#if defined(LDIAG_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelSet* best_available() noexcept {
  if (const KernelSet* k = avx2_kernels()) return k;
  return &scalar_kernels();
}

std::atomic<const KernelSet*>& active_slot() noexcept {
  static std::atomic<const KernelSet*> slot{best_available()};
  return slot;
}

}  // namespace

const KernelSet* avx2_kernels() noexcept {
#if defined(LDIAG_HAVE_AVX2_TU)
  static const bool supported = cpu_has_avx2_fma();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet& active_kernels() noexcept { return *active_slot().load(std::memory_order_acquire); }

bool select_kernels(KernelChoice choice) noexcept {
  const KernelSet* next = nullptr;
  switch (choice) {
    case KernelChoice::Auto: next = best_available(); break;
    case KernelChoice::Scalar: next = &scalar_kernels(); break;
    case KernelChoice::Avx2: next = avx2_kernels(); break;
  }
  if (!next) return false;
  active_slot().store(next, std::memory_order_release);
  return true;
}

}  // namespace ldiag::simd
