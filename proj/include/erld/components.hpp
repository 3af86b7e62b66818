#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "erld/document.hpp"
#include "erld/index.hpp"
#include "erld/rswoosh.hpp"

namespace erld {

/// Union-find with path compression and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);

  [[nodiscard]] std::size_t find(std::size_t x);
  /// Returns false if x and y were already in one set.
  bool unite(std::size_t x, std::size_t y);
  [[nodiscard]] std::size_t set_size(std::size_t x) { return size_[find(x)]; }
  [[nodiscard]] std::size_t size() const noexcept { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

using Edge = std::pair<std::string, std::string>;
using EdgeList = std::vector<Edge>;
/// Classes sorted by their smallest member.
using Partition = std::vector<IdSet>;

/// Star edges from `central` to every other member.
[[nodiscard]] EdgeList star_edges(const IdSet& members, std::string_view central);
/// Star edges centred on the smallest member id.
[[nodiscard]] EdgeList edges_from_partial_entity(const PartialEntity& pe);

/// Classes of `nodes` under the edge relation; isolated nodes are singletons.
/// Throws InputError when an edge names a node outside `nodes`.
[[nodiscard]] Partition connected_components(const EdgeList& edges, const IdSet& nodes);

[[nodiscard]] std::string entity_id_for(const IdSet& members);

/// One merged entity per class, id "E:" + smallest member.
[[nodiscard]] std::vector<Entity> consolidate(const Partition& partition,
                                              const PrimaryKeyStore& store);
[[nodiscard]] Entity make_entity(std::string id, const IdSet& members,
                                 const PrimaryKeyStore& store);

}  // namespace erld
