#include "erld/lsh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "erld/error.hpp"

namespace erld {

namespace {

bool is_prime(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t d = 2; d * d <= v; ++d) {
    if (v % d == 0) return false;
  }
  return true;
}

}  // namespace

LshParams LshParams::generate(std::uint32_t m, std::uint32_t n, std::uint64_t rng_seed,
                              std::uint64_t p) {
  LshParams params;
  params.m = m;
  params.n = n;
  params.p = p;
  params.rng_seed = rng_seed;
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<std::uint64_t> pick_a(1, p - 1);
  std::uniform_int_distribution<std::uint64_t> pick_b(0, p - 1);
  std::set<std::pair<std::uint64_t, std::uint64_t>> used;
  const std::size_t k = std::size_t{m} * n;
  while (params.a.size() < k) {
    const auto a = pick_a(rng);
    const auto b = pick_b(rng);
    if (!used.emplace(a, b).second) continue;
    params.a.push_back(a);
    params.b.push_back(b);
  }
  params.validate();
  return params;
}

void LshParams::validate() const {
  if (m < 1 || n < 1) throw ConfigError("LSH needs m >= 1 and n >= 1");
  if (p >= (1ULL << 32) || !is_prime(p)) throw ConfigError("LSH modulus must be a prime below 2^32");
  if (a.size() != num_functions() || b.size() != num_functions()) {
    throw ConfigError("LSH coefficient count does not match m*n");
  }
  std::set<std::pair<std::uint64_t, std::uint64_t>> used;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0 || a[k] >= p || b[k] >= p) throw ConfigError("LSH coefficient out of range");
    if (!used.emplace(a[k], b[k]).second) throw ConfigError("duplicate LSH hash function");
  }
}

std::uint32_t TokenDictionary::intern(std::string_view word) {
  if (const auto it = ids_.find(word); it != ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  return id;
}

const std::uint32_t* TokenDictionary::find(std::string_view word) const {
  const auto it = ids_.find(word);
  return it == ids_.end() ? nullptr : &it->second;
}

WordSet word_set(const Document& doc, const SchemaConfig& schema, TokenDictionary& dictionary) {
  WordSet out;
  std::string word;
  for (const auto& [name, values] : doc.attrs) {
    if (schema.resolve(doc.primary_type(), name).is_referential()) continue;
    for (const auto& v : values) {
      std::size_t i = 0;
      while (i < v.size()) {
        while (i < v.size() && std::isspace(static_cast<unsigned char>(v[i]))) ++i;
        word.clear();
        while (i < v.size() && !std::isspace(static_cast<unsigned char>(v[i]))) {
          word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(v[i]))));
          ++i;
        }
        if (!word.empty()) out.push_back(dictionary.intern(word));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MinHashSignature minhash_signature(std::span<const std::uint32_t> tokens, const LshParams& params,
                                   const simd::MinhashKernels& kernels) {
  if (tokens.empty()) throw InputError("minhash of an empty token set");
  MinHashSignature sig;
  sig.values.resize(params.num_functions());
  kernels.signature(tokens, params.a, params.b, params.p, sig.values);
  return sig;
}

MinHashSignature minhash_signature(std::span<const std::uint32_t> tokens,
                                   const LshParams& params) {
  return minhash_signature(tokens, params, simd::active_kernels());
}

std::vector<std::string> bucket_ids(const MinHashSignature& sig, const LshParams& params) {
  if (sig.values.size() != params.num_functions()) {
    throw InputError("signature length does not match m*n");
  }
  std::vector<std::string> ids;
  ids.reserve(params.n);
  for (std::uint32_t band = 0; band < params.n; ++band) {
    std::string id = std::to_string(band);
    id.push_back(':');
    for (std::uint32_t row = 0; row < params.m; ++row) {
      if (row > 0) id.push_back(',');
      id += std::to_string(sig.values[std::size_t{band} * params.m + row]);
    }
    ids.push_back(std::move(id));
  }
  return ids;
}

std::vector<std::string> document_bucket_ids(const Document& doc, const SchemaConfig& schema,
                                             TokenDictionary& dictionary,
                                             const LshParams& params) {
  const WordSet words = word_set(doc, schema, dictionary);
  if (words.empty()) return {"empty:" + doc.id};
  if (dictionary.size() >= params.p) throw ConfigError("token dictionary outgrew the LSH modulus");
  return bucket_ids(minhash_signature(words, params), params);
}

void LshIndex::add(const std::string& bucket, std::string_view id) {
  auto it = buckets_.find(bucket);
  if (it == buckets_.end()) it = buckets_.emplace(bucket, IdSet{}).first;
  it->second.emplace(id);
}

void LshIndex::add(const std::string& bucket, const IdSet& ids) {
  auto it = buckets_.find(bucket);
  if (it == buckets_.end()) it = buckets_.emplace(bucket, IdSet{}).first;
  it->second.insert(ids.begin(), ids.end());
}

const IdSet* LshIndex::find(std::string_view bucket) const {
  const auto it = buckets_.find(bucket);
  return it == buckets_.end() ? nullptr : &it->second;
}

LshIndex assign_buckets(std::span<const Document> docs,
                        const std::map<std::string, IdSet, std::less<>>& traversal,
                        const SchemaConfig& schema, TokenDictionary& dictionary,
                        const LshParams& params) {
  LshIndex index;
  for (const auto& doc : docs) {
    const auto ts = traversal.find(doc.id);
    for (const auto& bucket : document_bucket_ids(doc, schema, dictionary, params)) {
      index.add(bucket, doc.id);
      if (ts != traversal.end()) index.add(bucket, ts->second);
    }
  }
  return index;
}

double collision_probability(double j, std::uint32_t m, std::uint32_t n) {
  return 1.0 - std::pow(1.0 - std::pow(j, m), n);
}

}  // namespace erld
