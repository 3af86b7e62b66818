#pragma once

#include <functional>
#include <vector>

#include "erld/document.hpp"
#include "erld/matching.hpp"

namespace erld {

struct PartialEntity {
  Document merged;
  IdSet members;
  /// Pre-existing entity ids absorbed; empty in batch runs.
  IdSet origin_entities;

  friend bool operator==(const PartialEntity&, const PartialEntity&) = default;
};

using MatchFn = std::function<bool(const MatchItem&, const MatchItem&)>;

/// R-Swoosh over one bucket. Items are first ordered by key, then taken one
/// at a time from the unresolved list and compared against every resolved
/// item; on the first match the resolved item is removed and the merge goes
/// back onto the unresolved list. The resolved list is the result.
/// `merges`, when given, receives the number of merges performed.
[[nodiscard]] std::vector<PartialEntity> rswoosh(std::vector<MatchItem> items, const MatchFn& match,
                                                 std::size_t* merges = nullptr);

}  // namespace erld
