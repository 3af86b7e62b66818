#pragma once

#include <cstddef>
#include <string>

#include "erld/document.hpp"
#include "erld/index.hpp"
#include "erld/schema.hpp"

namespace erld {

struct TraversalConfig {
  /// Number of DST-UST rounds. Four rounds reach every document of a
  /// five-document reference chain.
  int max_dst_ust_steps = 4;
  /// A single upstream search returning more documents than this is dropped.
  int ust_fanout_threshold = 10;

  /// Throws ConfigError unless both limits are >= 1.
  void validate() const;

  friend bool operator==(const TraversalConfig&, const TraversalConfig&) = default;
};

struct TraversalSet {
  std::string owner;
  IdSet members;

  friend bool operator==(const TraversalSet&, const TraversalSet&) = default;
};

/// One DST step: explicit-referential values of `doc` looked up as primary
/// keys. Dangling references are dropped.
[[nodiscard]] IdSet downstream_step(const Document& doc, const PrimaryKeyStore& store,
                                    const SchemaConfig& schema);

/// One UST step: `doc`'s primary key and explicit-referential values searched
/// in the inverted index, `doc` itself excluded. A search whose hit count
/// (excluding `doc`) exceeds `fanout_threshold` contributes nothing.
[[nodiscard]] IdSet upstream_step(const Document& doc, const InvertedIndex& index,
                                  const SchemaConfig& schema, int fanout_threshold);

/// Bounded DST-UST expansion from `doc`. Each round runs DST on the frontier,
/// then UST on the frontier plus the DST hits; the next frontier is whatever
/// was newly added. `doc` is never a member of its own set.
[[nodiscard]] TraversalSet traversal_set(const Document& doc, const TraversalConfig& cfg,
                                         const PrimaryKeyStore& store, const InvertedIndex& index,
                                         const SchemaConfig& schema);

}  // namespace erld
