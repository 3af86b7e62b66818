#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "erld/document.hpp"
#include "erld/schema.hpp"
#include "erld/similarity.hpp"
#include "json.hpp"

namespace erld {

/// A document or (partially) merged entity as seen by the match function.
struct MatchItem {
  Document merged;
  /// Original document ids folded into this item.
  IdSet members;
  /// Previously resolved entity ids absorbed into this item (incremental runs).
  IdSet origins;
  /// Ids (documents or entities) reachable from any member by traversal.
  IdSet traversal;
  /// Canonical identity: sorted members joined by '\x1f'. Pair-cache key part.
  std::string key;

  [[nodiscard]] static MatchItem from_document(const Document& doc, IdSet traversal = {});
  [[nodiscard]] static MatchItem from_entity(const Entity& entity, IdSet traversal = {});

  /// True iff some id in this item's traversal set names one of `other`'s
  /// members or origins.
  [[nodiscard]] bool refers_to(const MatchItem& other) const;
};

[[nodiscard]] std::string member_key(const IdSet& members);
[[nodiscard]] MatchItem merge_items(const MatchItem& a, const MatchItem& b);

enum class PredicateKind { equal, similar, traversal };

struct Conjunct {
  PredicateKind kind = PredicateKind::equal;
  std::string attribute;  // empty for traversal
  Metric metric = Metric::jaro_winkler;
  double threshold = 1.0;
};

struct MatchRule {
  std::string name;
  std::vector<Conjunct> conjuncts;
};

inline constexpr double kDefaultSoftThreshold = 0.9;

/// Disjunction of conjunctive rules.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<MatchRule> rules);

  /// Reads {"rules": [...]} (or a bare array). Each rule is either an array of
  /// conjuncts or {"name": str, "conjuncts": [...]}; a conjunct is
  /// {"predicate": "same"|"equal"|"similar"|"traversal", "attribute"?,
  /// "metric"?, "threshold"?}. "same" picks equal for hard/unique attributes
  /// and similar for soft ones. Unknown attributes raise ConfigError here.
  [[nodiscard]] static RuleSet from_json(const nlohmann::json& j, const SchemaConfig& schema);

  [[nodiscard]] const std::vector<MatchRule>& rules() const noexcept { return rules_; }
  [[nodiscard]] bool uses_traversal() const noexcept;

 private:
  std::vector<MatchRule> rules_;
};

/// Evaluates one predicate. Absent attributes make equal/similar false.
[[nodiscard]] bool evaluate_predicate(const Conjunct& c, const MatchItem& a, const MatchItem& b);

/// Exact predicate: the two value sets share a textually identical value.
[[nodiscard]] bool same_value(std::string_view attribute, const Document& a, const Document& b);
/// Max pairwise similarity over the two value sets.
[[nodiscard]] double best_similarity(Metric metric, std::string_view attribute, const Document& a,
                                     const Document& b);
/// isInTraversalSet(a, b): b is named by a's traversal set.
[[nodiscard]] bool in_traversal_set(const MatchItem& a, const MatchItem& b);

/// Pluggable match function. Implementations must be symmetric and safe to
/// call concurrently.
class MatchFunction {
 public:
  virtual ~MatchFunction() = default;
  [[nodiscard]] virtual bool matches(const MatchItem& a, const MatchItem& b) const = 0;
};

class RuleMatcher final : public MatchFunction {
 public:
  explicit RuleMatcher(RuleSet rules) : rules_(std::move(rules)) {}
  [[nodiscard]] bool matches(const MatchItem& a, const MatchItem& b) const override;
  /// Index of the first satisfied rule, if any.
  [[nodiscard]] std::optional<std::size_t> first_satisfied(const MatchItem& a,
                                                           const MatchItem& b) const;
  [[nodiscard]] const RuleSet& rules() const noexcept { return rules_; }

 private:
  RuleSet rules_;
};

/// Linear classifier over similarity features: match iff bias + w.f >= 0.
/// Stands in for a trained model; weights come from configuration.
class LinearScorer final : public MatchFunction {
 public:
  struct Feature {
    std::string attribute;  // empty: traversal indicator
    Metric metric = Metric::jaccard;
  };

  LinearScorer(std::vector<Feature> features, std::vector<double> weights, double bias);
  /// Reads {"features": [{"attribute", "metric"} | {"traversal": true}],
  /// "weights": [...], "bias": x}.
  [[nodiscard]] static LinearScorer from_json(const nlohmann::json& j, const SchemaConfig& schema);

  [[nodiscard]] std::vector<double> features(const MatchItem& a, const MatchItem& b) const;
  [[nodiscard]] double score(const MatchItem& a, const MatchItem& b) const;
  [[nodiscard]] bool matches(const MatchItem& a, const MatchItem& b) const override;

 private:
  std::vector<Feature> features_;
  std::vector<double> weights_;
  double bias_;
};

/// Builds a match function from {"rules": [...]} or {"linear": {...}}.
[[nodiscard]] std::shared_ptr<const MatchFunction> make_match_function(const nlohmann::json& spec,
                                                                       const SchemaConfig& schema);

/// Known matching and non-matching item pairs, keyed by the canonical member
/// keys of both sides. Bounded; least recently used pairs are evicted first.
/// Lookups and inserts are serialized by an internal mutex.
class PairCache {
 public:
  static constexpr std::size_t kDefaultCapacity = 10'000'000;

  struct Entry {
    std::string pair_key;
    bool matched = false;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  explicit PairCache(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {}
  PairCache(const PairCache& other);
  PairCache& operator=(const PairCache& other);

  [[nodiscard]] static std::string pair_key(std::string_view a, std::string_view b);

  [[nodiscard]] std::optional<bool> lookup(std::string_view a_key, std::string_view b_key);
  void record(std::string_view a_key, std::string_view b_key, bool matched);

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] std::size_t matching_count() const;
  /// Entries from least to most recently used.
  [[nodiscard]] std::vector<Entry> entries() const;
  /// Replaces the contents; later entries count as more recently used.
  void assign(std::size_t capacity, std::vector<Entry> entries);

  friend bool operator==(const PairCache& x, const PairCache& y) {
    return x.capacity_ == y.capacity_ && x.entries() == y.entries();
  }

 private:
  void insert_locked(std::string key, bool matched);

  mutable std::mutex mu_;
  std::size_t capacity_;
  std::list<Entry> order_;
  std::unordered_map<std::string_view, std::list<Entry>::iterator> map_;
};

/// Match function behind the pair cache, with evaluation counters.
class CachedMatcher {
 public:
  CachedMatcher(const MatchFunction& fn, PairCache& cache) : fn_(fn), cache_(cache) {}

  bool operator()(const MatchItem& a, const MatchItem& b);

  [[nodiscard]] std::uint64_t fresh_evaluations() const noexcept { return fresh_.load(); }
  [[nodiscard]] std::uint64_t cache_hits() const noexcept { return hits_.load(); }

 private:
  const MatchFunction& fn_;
  PairCache& cache_;
  std::atomic<std::uint64_t> fresh_{0};
  std::atomic<std::uint64_t> hits_{0};
};

}  // namespace erld
