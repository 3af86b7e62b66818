#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "erld/simd/minhash_kernels.hpp"

namespace erld::simd {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "scalar";
}

namespace {

constexpr MinhashKernels kScalar{Isa::scalar, &scalar::minhash_signature, &scalar::count_equal};
#if defined(__x86_64__) || defined(_M_X64)
constexpr MinhashKernels kAvx2{Isa::avx2, &avx2::minhash_signature, &avx2::count_equal};
#endif

std::atomic<const MinhashKernels*> g_active{nullptr};

const MinhashKernels* detect() {
  if (const char* env = std::getenv("ERLD_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && isa_supported(Isa::avx2)) return &kernels_for(Isa::avx2);
  }
  if (isa_supported(Isa::avx2)) return &kernels_for(Isa::avx2);
  return &kScalar;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
  }
  return false;
}

const MinhashKernels& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("ISA not supported on this CPU: " + std::string(to_string(isa)));
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

const MinhashKernels& active_kernels() {
  const MinhashKernels* k = g_active.load(std::memory_order_acquire);
  if (k == nullptr) {
    k = detect();
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

void force_isa(Isa isa) { g_active.store(&kernels_for(isa), std::memory_order_release); }

void reset_isa() { g_active.store(detect(), std::memory_order_release); }

}  // namespace erld::simd
