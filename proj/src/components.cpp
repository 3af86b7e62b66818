#include "erld/components.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "erld/error.hpp"

namespace erld {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSets::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const std::size_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool DisjointSets::unite(std::size_t x, std::size_t y) {
  std::size_t rx = find(x);
  std::size_t ry = find(y);
  if (rx == ry) return false;
  if (size_[rx] < size_[ry]) std::swap(rx, ry);
  parent_[ry] = rx;
  size_[rx] += size_[ry];
  return true;
}

EdgeList star_edges(const IdSet& members, std::string_view central) {
  EdgeList edges;
  edges.reserve(members.empty() ? 0 : members.size() - 1);
  for (const auto& m : members) {
    if (m != central) edges.emplace_back(std::string(central), m);
  }
  return edges;
}

EdgeList edges_from_partial_entity(const PartialEntity& pe) {
  if (pe.members.empty()) return {};
  return star_edges(pe.members, *pe.members.begin());
}

Partition connected_components(const EdgeList& edges, const IdSet& nodes) {
  std::vector<const std::string*> names;
  names.reserve(nodes.size());
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(nodes.size());
  for (const auto& n : nodes) {
    index.emplace(n, names.size());
    names.push_back(&n);
  }
  auto lookup = [&](const std::string& id) {
    const auto it = index.find(id);
    if (it == index.end()) throw InputError("edge endpoint '" + id + "' is not a known node");
    return it->second;
  };
  DisjointSets sets(names.size());
  for (const auto& [u, v] : edges) sets.unite(lookup(u), lookup(v));

  // Nodes are visited in sorted order, so classes come out ordered by their
  // smallest member and each class is filled in sorted order.
  std::vector<std::size_t> slot(names.size(), SIZE_MAX);
  Partition out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::size_t root = sets.find(i);
    if (slot[root] == SIZE_MAX) {
      slot[root] = out.size();
      out.emplace_back();
    }
    out[slot[root]].insert(out[slot[root]].end(), *names[i]);
  }
  return out;
}

std::string entity_id_for(const IdSet& members) {
  return members.empty() ? std::string("E:") : "E:" + *members.begin();
}

Entity make_entity(std::string id, const IdSet& members, const PrimaryKeyStore& store) {
  Entity e;
  e.id = std::move(id);
  e.members = members;
  bool first = true;
  for (const auto& m : members) {
    const Document* d = store.find(m);
    if (d == nullptr) throw InputError("entity member '" + m + "' is not a stored document");
    if (first) {
      e.merged = *d;
      first = false;
    } else {
      merge_into(e.merged, *d);
    }
  }
  e.merged.id = e.id;
  return e;
}

std::vector<Entity> consolidate(const Partition& partition, const PrimaryKeyStore& store) {
  std::vector<Entity> out;
  out.reserve(partition.size());
  for (const auto& cls : partition) out.push_back(make_entity(entity_id_for(cls), cls, store));
  return out;
}

}  // namespace erld
