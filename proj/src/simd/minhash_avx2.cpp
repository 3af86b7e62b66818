#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <bit>

#include "erld/simd/minhash_kernels.hpp"

namespace erld::simd::avx2 {

namespace {

// Reduces v < 2^63 modulo 2^31 - 1 in four lanes: two folds of the high bits
// onto the low 31 bits, then one conditional subtraction.
__attribute__((target("avx2"))) inline __m256i mod_mersenne31(__m256i v, __m256i p) {
  v = _mm256_add_epi64(_mm256_and_si256(v, p), _mm256_srli_epi64(v, 31));
  v = _mm256_add_epi64(_mm256_and_si256(v, p), _mm256_srli_epi64(v, 31));
  const __m256i ge = _mm256_cmpgt_epi64(v, _mm256_sub_epi64(p, _mm256_set1_epi64x(1)));
  return _mm256_sub_epi64(v, _mm256_and_si256(ge, p));
}

}  // namespace

__attribute__((target("avx2"))) void minhash_signature(std::span<const std::uint32_t> tokens,
                                                        std::span<const std::uint64_t> a,
                                                        std::span<const std::uint64_t> b,
                                                        std::uint64_t p,
                                                        std::span<std::uint32_t> out) {
  if (p != kMersenne31) {
    scalar::minhash_signature(tokens, a, b, p, out);
    return;
  }
  const std::size_t k_count = out.size();
  const __m256i vp = _mm256_set1_epi64x(static_cast<long long>(kMersenne31));
  std::size_t k = 0;
  for (; k + 4 <= k_count; k += 4) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + k));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + k));
    __m256i best = vp;  // every reduced value is < p
    for (const std::uint32_t x : tokens) {
      // a, x < 2^31, so the 32x32->64 multiply of the low halves is exact.
      const __m256i prod = _mm256_mul_epu32(va, _mm256_set1_epi64x(x));
      const __m256i h = mod_mersenne31(_mm256_add_epi64(prod, vb), vp);
      best = _mm256_blendv_epi8(best, h, _mm256_cmpgt_epi64(best, h));
    }
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), best);
    for (int i = 0; i < 4; ++i) out[k + i] = static_cast<std::uint32_t>(lanes[i]);
  }
  if (k < k_count) {
    scalar::minhash_signature(tokens, a.subspan(k), b.subspan(k), p, out.subspan(k));
  }
}

__attribute__((target("avx2"))) std::size_t count_equal(std::span<const std::uint32_t> x,
                                                        std::span<const std::uint32_t> y) {
  std::size_t n = 0;
  std::size_t i = 0;
  for (; i + 8 <= x.size(); i += 8) {
    const __m256i vx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x.data() + i));
    const __m256i vy = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(y.data() + i));
    const int mask = _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(vx, vy)));
    n += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  return n + scalar::count_equal(x.subspan(i), y.subspan(i));
}

}  // namespace erld::simd::avx2

#endif
