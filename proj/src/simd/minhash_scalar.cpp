#include <algorithm>
#include <limits>

#include "erld/simd/minhash_kernels.hpp"

namespace erld::simd::scalar {

void minhash_signature(std::span<const std::uint32_t> tokens, std::span<const std::uint64_t> a,
                       std::span<const std::uint64_t> b, std::uint64_t p,
                       std::span<std::uint32_t> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (const std::uint32_t x : tokens) {
      best = std::min(best, (a[k] * x + b[k]) % p);
    }
    out[k] = static_cast<std::uint32_t>(best);
  }
}

std::size_t count_equal(std::span<const std::uint32_t> x, std::span<const std::uint32_t> y) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += x[i] == y[i] ? 1 : 0;
  return n;
}

}  // namespace erld::simd::scalar
