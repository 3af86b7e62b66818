#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "erld/document.hpp"
#include "erld/schema.hpp"
#include "erld/simd/minhash_kernels.hpp"

namespace erld {

inline constexpr std::uint64_t kDefaultPrime = simd::kMersenne31;

/// Banding parameters plus the m*n affine minhash coefficients, stored in
/// (band, row) order: function k belongs to band k / m.
struct LshParams {
  std::uint32_t m = 3;
  std::uint32_t n = 6;
  std::uint64_t p = kDefaultPrime;
  std::uint64_t rng_seed = 0x5eed;
  std::vector<std::uint64_t> a;
  std::vector<std::uint64_t> b;

  /// Draws distinct (a, b) pairs with 1 <= a < p, 0 <= b < p from rng_seed.
  [[nodiscard]] static LshParams generate(std::uint32_t m, std::uint32_t n, std::uint64_t rng_seed,
                                          std::uint64_t p = kDefaultPrime);
  [[nodiscard]] std::size_t num_functions() const noexcept { return std::size_t{m} * n; }
  /// Throws ConfigError on any broken invariant.
  void validate() const;

  friend bool operator==(const LshParams&, const LshParams&) = default;
};

/// Append-only word -> integer mapping shared by every hashed document so that
/// later runs assign the same ids to the same words.
class TokenDictionary {
 public:
  [[nodiscard]] std::uint32_t intern(std::string_view word);
  [[nodiscard]] const std::uint32_t* find(std::string_view word) const;
  [[nodiscard]] std::size_t size() const noexcept { return words_.size(); }
  /// Words in id order.
  [[nodiscard]] const std::vector<std::string>& words() const noexcept { return words_; }

  friend bool operator==(const TokenDictionary& x, const TokenDictionary& y) {
    return x.words_ == y.words_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ids_;
  std::vector<std::string> words_;
};

/// Sorted, duplicate-free token ids.
using WordSet = std::vector<std::uint32_t>;

/// Lowercased whitespace-split words of every non-referential attribute value.
[[nodiscard]] WordSet word_set(const Document& doc, const SchemaConfig& schema,
                               TokenDictionary& dictionary);

struct MinHashSignature {
  std::vector<std::uint32_t> values;

  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

/// Throws InputError for an empty token set.
[[nodiscard]] MinHashSignature minhash_signature(std::span<const std::uint32_t> tokens,
                                                 const LshParams& params);
/// Same, with an explicit kernel set (equivalence tests, benchmarks).
[[nodiscard]] MinHashSignature minhash_signature(std::span<const std::uint32_t> tokens,
                                                 const LshParams& params,
                                                 const simd::MinhashKernels& kernels);

/// n ids, band j rendered as "j:v0,v1,...,v(m-1)".
[[nodiscard]] std::vector<std::string> bucket_ids(const MinHashSignature& sig,
                                                  const LshParams& params);

/// Bucket ids for a document; an empty word set yields a single private
/// bucket "empty:<doc id>".
[[nodiscard]] std::vector<std::string> document_bucket_ids(const Document& doc,
                                                           const SchemaConfig& schema,
                                                           TokenDictionary& dictionary,
                                                           const LshParams& params);

/// Bucket id -> member ids.
class LshIndex {
 public:
  using Map = std::map<std::string, IdSet, std::less<>>;

  void add(const std::string& bucket, std::string_view id);
  void add(const std::string& bucket, const IdSet& ids);
  [[nodiscard]] const IdSet* find(std::string_view bucket) const;
  [[nodiscard]] std::size_t size() const noexcept { return buckets_.size(); }
  [[nodiscard]] Map::const_iterator begin() const noexcept { return buckets_.begin(); }
  [[nodiscard]] Map::const_iterator end() const noexcept { return buckets_.end(); }

  friend bool operator==(const LshIndex&, const LshIndex&) = default;

 private:
  Map buckets_;
};

/// Populates buckets: each document lands in each of its bucket ids together
/// with its traversal-set members. `traversal` maps document id to its set;
/// missing entries mean an empty set.
[[nodiscard]] LshIndex assign_buckets(std::span<const Document> docs,
                                      const std::map<std::string, IdSet, std::less<>>& traversal,
                                      const SchemaConfig& schema, TokenDictionary& dictionary,
                                      const LshParams& params);

/// Probability that two sets with Jaccard similarity j share at least one
/// bucket: 1 - (1 - j^m)^n.
[[nodiscard]] double collision_probability(double j, std::uint32_t m, std::uint32_t n);

}  // namespace erld
