#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "erld/components.hpp"
#include "erld/document.hpp"
#include "erld/index.hpp"
#include "erld/lsh.hpp"
#include "erld/matching.hpp"
#include "erld/schema.hpp"
#include "erld/traversal.hpp"
#include "json.hpp"

namespace erld {

inline constexpr std::uint64_t kDefaultLshSeed = 0x5eed;

struct ResolverConfig {
  SchemaConfig schema;
  /// {"rules": [...]} or {"linear": {...}}; see make_match_function().
  nlohmann::json match_spec;
  TraversalConfig traversal;
  LshParams lsh = LshParams::generate(3, 6, kDefaultLshSeed);
  std::size_t pair_cache_capacity = PairCache::kDefaultCapacity;

  [[nodiscard]] std::shared_ptr<const MatchFunction> matcher() const;
  /// Digest of the match configuration; a persisted pair cache is only valid
  /// for the match function it was filled by.
  [[nodiscard]] std::string match_fingerprint() const;
};

struct RunStats {
  std::size_t documents = 0;
  /// Buckets considered (batch: all; incremental: touched).
  std::size_t buckets = 0;
  /// Buckets actually resolved: at least two items and a member set not seen before.
  std::size_t resolved_buckets = 0;
  /// Sum over considered buckets of C(size, 2).
  std::uint64_t bucket_pairs = 0;
  std::uint64_t fresh_evaluations = 0;
  std::uint64_t cache_hits = 0;
  std::size_t partial_entities = 0;
  std::size_t edges = 0;
  /// Previously resolved entities read during an incremental run.
  std::size_t entities_read = 0;
  double seconds = 0.0;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Everything an incremental run needs from earlier runs.
struct ResolutionState {
  static constexpr std::uint32_t kFormatVersion = 1;

  SchemaConfig schema;
  nlohmann::json match_spec;
  TraversalConfig traversal_config;
  LshParams lsh_params;
  std::string schema_hash;
  std::string match_hash;

  Indexes indexes;
  LshIndex lsh;
  TokenDictionary dictionary;
  std::map<std::string, std::string, std::less<>> doc_entity;
  std::map<std::string, Entity, std::less<>> entities;
  /// Per-document traversal sets over document ids; empty sets are omitted.
  std::map<std::string, IdSet, std::less<>> traversal;
  /// Retired entity id -> id of the entity that absorbed it.
  std::map<std::string, std::string, std::less<>> tombstones;
  PairCache cache;

  /// Entity lookup that records the access (see entity_reads()).
  [[nodiscard]] const Entity& read_entity(std::string_view id) const;
  [[nodiscard]] const IdSet& entity_reads() const noexcept { return reads_; }
  void clear_entity_reads() const { reads_.clear(); }

  /// Throws StateError(invariant) on any inconsistency.
  void check_invariants() const;
  [[nodiscard]] ResolverConfig config() const;
  [[nodiscard]] std::vector<Entity> all_entities() const;
  /// Follows the tombstone chain to the live entity id.
  [[nodiscard]] std::string resolve_entity_id(std::string_view id) const;

  friend bool operator==(const ResolutionState& x, const ResolutionState& y);

 private:
  mutable IdSet reads_;
};

struct BatchResult {
  std::vector<Entity> entities;
  ResolutionState state;
  RunStats stats;
};

struct IncrementalResult {
  /// Entities created or rebuilt by this run.
  std::vector<Entity> updated;
  std::vector<std::string> retired;
  /// Previously resolved entities that entered some touched bucket.
  IdSet touched_entities;
  RunStats stats;
};

/// Index, traverse, hash, resolve every bucket, consolidate. An empty corpus
/// yields no entities and a valid empty state.
[[nodiscard]] BatchResult resolve_batch(std::vector<Document> docs, const ResolverConfig& cfg);

/// Resolves `new_docs` against `state`, touching only buckets the new
/// documents hash to and entities reachable from them. Throws
/// StateError(stale) if `cfg` does not match the state's schema, match
/// configuration or LSH parameters, and InputError on id clashes.
[[nodiscard]] IncrementalResult resolve_incremental(std::vector<Document> new_docs,
                                                    ResolutionState& state,
                                                    const ResolverConfig& cfg);

/// Writes a manifest plus one checksummed file per structure into `dir`.
void save_state(const ResolutionState& state, const std::filesystem::path& dir);
/// Verifies version, sizes, checksums and invariants before returning.
[[nodiscard]] ResolutionState load_state(const std::filesystem::path& dir);

/// Exclusive advisory lock on a state directory, held for the object's
/// lifetime. A second lock on the same directory throws StateError(locked).
class StateLock {
 public:
  explicit StateLock(std::filesystem::path dir);
  ~StateLock();
  StateLock(const StateLock&) = delete;
  StateLock& operator=(const StateLock&) = delete;

 private:
  std::filesystem::path file_;
};

/// Distinct unordered id pairs sharing at least one bucket.
[[nodiscard]] std::uint64_t distinct_cobucketed_pairs(const LshIndex& index);

[[nodiscard]] nlohmann::json to_json(const TraversalConfig& cfg);
[[nodiscard]] TraversalConfig traversal_config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const LshParams& params);
[[nodiscard]] LshParams lsh_params_from_json(const nlohmann::json& j);

/// Entity output line: {"entity_id", "members", "attrs"}.
[[nodiscard]] nlohmann::json entity_to_json(const Entity& e);
void write_entities(std::ostream& out, const std::vector<Entity>& entities);

}  // namespace erld
