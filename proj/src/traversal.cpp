#include "erld/traversal.hpp"

#include <vector>

#include "erld/error.hpp"

namespace erld {

void TraversalConfig::validate() const {
  if (max_dst_ust_steps < 1) throw ConfigError("max_dst_ust_steps must be >= 1");
  if (ust_fanout_threshold < 1) throw ConfigError("ust_fanout_threshold must be >= 1");
}

namespace {

template <typename Fn>
void for_each_explicit_value(const Document& doc, const SchemaConfig& schema, Fn&& fn) {
  for (const auto& [name, values] : doc.attrs) {
    if (schema.resolve(doc.primary_type(), name).ref_role != RefRole::explicit_ref) continue;
    for (const auto& v : values) fn(v);
  }
}

}  // namespace

IdSet downstream_step(const Document& doc, const PrimaryKeyStore& store,
                      const SchemaConfig& schema) {
  IdSet out;
  for_each_explicit_value(doc, schema, [&](const std::string& v) {
    if (v != doc.id && store.contains(v)) out.insert(v);
  });
  return out;
}

IdSet upstream_step(const Document& doc, const InvertedIndex& index, const SchemaConfig& schema,
                    int fanout_threshold) {
  IdSet out;
  auto search = [&](const std::string& token) {
    const IdSet& hits = index.search(token);
    const std::size_t count = hits.size() - (hits.contains(doc.id) ? 1 : 0);
    if (count > static_cast<std::size_t>(fanout_threshold)) return;
    for (const auto& id : hits) {
      if (id != doc.id) out.insert(id);
    }
  };
  search(doc.id);
  for_each_explicit_value(doc, schema, search);
  return out;
}

TraversalSet traversal_set(const Document& doc, const TraversalConfig& cfg,
                           const PrimaryKeyStore& store, const InvertedIndex& index,
                           const SchemaConfig& schema) {
  TraversalSet ts{.owner = doc.id, .members = {}};
  IdSet seen{doc.id};
  std::vector<const Document*> frontier{&doc};

  for (int step = 0; step < cfg.max_dst_ust_steps && !frontier.empty(); ++step) {
    std::vector<const Document*> added;
    auto admit = [&](const std::string& id) {
      if (!seen.insert(id).second) return;
      if (const Document* d = store.find(id)) added.push_back(d);
    };

    std::vector<const Document*> ust_sources = frontier;
    for (const Document* d : frontier) {
      for (const auto& id : downstream_step(*d, store, schema)) {
        const std::size_t before = added.size();
        admit(id);
        if (added.size() > before) ust_sources.push_back(added.back());
      }
    }
    for (const Document* d : ust_sources) {
      for (const auto& id : upstream_step(*d, index, schema, cfg.ust_fanout_threshold)) admit(id);
    }
    frontier = std::move(added);
  }

  seen.erase(doc.id);
  ts.members = std::move(seen);
  return ts;
}

}  // namespace erld
