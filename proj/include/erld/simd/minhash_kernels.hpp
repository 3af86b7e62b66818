#pragma once

// MinHash inner loops: a scalar reference and vectorized variants, one of
// which is chosen at runtime from the CPU's capabilities.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace erld::simd {

/// 2^31 - 1. The vectorized kernels reduce modulo this prime only.
inline constexpr std::uint64_t kMersenne31 = 2147483647ULL;

enum class Isa { scalar, avx2 };

[[nodiscard]] std::string_view to_string(Isa isa) noexcept;

/// out[k] = min over x in tokens of (a[k] * x + b[k]) mod p.
/// Requires a[k], b[k], x < p; tokens non-empty; a, b, out the same length.
using SignatureFn = void (*)(std::span<const std::uint32_t> tokens,
                             std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                             std::uint64_t p, std::span<std::uint32_t> out);

/// Number of positions where the two equally sized spans agree.
using CountEqualFn = std::size_t (*)(std::span<const std::uint32_t> x,
                                     std::span<const std::uint32_t> y);

struct MinhashKernels {
  Isa isa;
  SignatureFn signature;
  CountEqualFn count_equal;
};

namespace scalar {
void minhash_signature(std::span<const std::uint32_t> tokens, std::span<const std::uint64_t> a,
                       std::span<const std::uint64_t> b, std::uint64_t p,
                       std::span<std::uint32_t> out);
std::size_t count_equal(std::span<const std::uint32_t> x, std::span<const std::uint32_t> y);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
// Falls back to the scalar kernel when p != kMersenne31.
void minhash_signature(std::span<const std::uint32_t> tokens, std::span<const std::uint64_t> a,
                       std::span<const std::uint64_t> b, std::uint64_t p,
                       std::span<std::uint32_t> out);
std::size_t count_equal(std::span<const std::uint32_t> x, std::span<const std::uint32_t> y);
}  // namespace avx2
#endif

[[nodiscard]] bool isa_supported(Isa isa) noexcept;

/// Kernels for a specific ISA; throws std::invalid_argument if the CPU lacks it.
[[nodiscard]] const MinhashKernels& kernels_for(Isa isa);

/// Currently active kernels: the best supported ISA unless overridden by
/// force_isa() or the ERLD_SIMD environment variable ("scalar" / "avx2").
[[nodiscard]] const MinhashKernels& active_kernels();

/// Overrides runtime selection (tests and benchmarks). Throws if unsupported.
void force_isa(Isa isa);
void reset_isa();

}  // namespace erld::simd
